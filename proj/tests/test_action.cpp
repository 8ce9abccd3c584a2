#include "linecospar/action.hpp"
#include "linecospar/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace linecospar;

TEST(ActionSpace, ExoskeletonPresetBounds) {
    const ActionSpace s = ActionSpace::exoskeleton();
    ASSERT_EQ(s.dims(), 6);
    const double lo[] = {0.08, 0.85, 0.25, 0.065, 5.5, 10.5};
    const double hi[] = {0.18, 1.15, 0.30, 0.075, 9.5, 14.5};
    for (int i = 0; i < 6; ++i) {
        EXPECT_DOUBLE_EQ(s.lower[i], lo[i]);
        EXPECT_DOUBLE_EQ(s.upper[i], hi[i]);
    }
    EXPECT_EQ(s.names[0], "step_length_m");
    EXPECT_EQ(s.names[5], "pelvis_pitch_deg");
}

TEST(ActionSpace, NormalizeRoundTrip) {
    const ActionSpace s = ActionSpace::exoskeleton();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd x(6);
        for (int i = 0; i < 6; ++i) x[i] = u(rng);
        const Eigen::VectorXd p = s.denormalize(x);
        EXPECT_TRUE(((p - s.lower).array() >= 0.0).all());
        EXPECT_TRUE(((s.upper - p).array() >= 0.0).all());
        EXPECT_LT((s.normalize(p) - x).cwiseAbs().maxCoeff(), 1e-12);
    }
    const Eigen::VectorXd corner = s.denormalize(Eigen::VectorXd::Ones(6));
    EXPECT_TRUE(((s.upper - corner).array() >= 0.0).all());
}

TEST(ActionSpace, RejectsBadBounds) {
    ActionSpace s = ActionSpace::unit(2, 10);
    s.upper[1] = 0.0;
    EXPECT_THROW(s.validate(), InvalidArgument);
    ActionSpace empty;
    EXPECT_THROW(empty.validate(), InvalidArgument);
}

TEST(Action, SamePointByIdOrCoordinates) {
    Action a{1, Eigen::Vector2d(0.1, 0.2)};
    Action b{2, Eigen::Vector2d(0.1, 0.2 + 1e-14)};
    Action c{1, Eigen::Vector2d(0.5, 0.5)};
    Action d{3, Eigen::Vector2d(0.1, 0.3)};
    EXPECT_TRUE(same_point(a, b));
    EXPECT_TRUE(same_point(a, c));
    EXPECT_FALSE(same_point(a, d));
}
