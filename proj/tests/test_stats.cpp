#include "linecospar/errors.hpp"
#include "linecospar/stats.hpp"

#include "reference.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace linecospar;

TEST(IncompleteBeta, MatchesBoost) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ab(0.1, 60.0), xs(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double a = ab(rng), b = ab(rng), x = xs(rng);
        EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12);
    }
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
    EXPECT_THROW(incomplete_beta(0.0, 1.0, 0.5), InvalidArgument);
}

TEST(StudentT, TwoSidedTails) {
    EXPECT_NEAR(student_t_two_sided(0.0, 5.0), 1.0, 1e-15);
    // t = 2.228 at 10 dof is the familiar 5% critical value.
    EXPECT_NEAR(student_t_two_sided(2.228138851986, 10.0), 0.05, 1e-9);
    EXPECT_EQ(student_t_two_sided(std::numeric_limits<double>::infinity(), 3.0), 0.0);
}

TEST(Pearson, MatchesReferenceOnRandomFixtures) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int fixture = 0; fixture < 20; ++fixture) {
        std::vector<double> x(100), y(100);
        const double mix = fixture / 20.0;
        for (int i = 0; i < 100; ++i) {
            x[i] = n01(rng);
            y[i] = mix * x[i] + (1.0 - mix) * n01(rng);
        }
        const auto got = pearson(x, y);
        const auto want = reference::pearson(x, y);
        ASSERT_TRUE(got && want);
        EXPECT_NEAR(got->r, want->r, 1e-10);
        EXPECT_NEAR(got->p, want->p, 1e-10);
        EXPECT_EQ(got->n, 100u);
    }
}

TEST(Pearson, PerfectAndUndefined) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> twice{2, 4, 6, 8, 10};
    const auto r = pearson(x, twice);
    ASSERT_TRUE(r);
    EXPECT_DOUBLE_EQ(r->r, 1.0);
    EXPECT_EQ(r->p, 0.0);
    const std::vector<double> flat{3, 3, 3, 3, 3};
    EXPECT_FALSE(pearson(x, flat).has_value());
    EXPECT_FALSE(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}).has_value());
    EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), DimensionMismatch);
}

TEST(Binning, EdgesAndClamping) {
    EXPECT_EQ(bin_of(0.0, 10), 0);
    EXPECT_EQ(bin_of(0.0999, 10), 0);
    EXPECT_EQ(bin_of(0.1, 10), 1);
    EXPECT_EQ(bin_of(1.0, 10), 9);
}

TEST(Visitation, ProportionalCountsGiveUnitCorrelation) {
    // One dimension: visits per bin k equal k, utilities per bin equal 2k.
    std::vector<Eigen::VectorXd> visited, points;
    std::vector<double> means;
    for (int k = 0; k < 10; ++k) {
        for (int v = 0; v < k; ++v) visited.push_back(Eigen::VectorXd::Constant(1, (k + 0.5) / 10.0));
        points.push_back(Eigen::VectorXd::Constant(1, (k + 0.5) / 10.0));
        means.push_back(2.0 * k);
    }
    const Eigen::VectorXd mean = Eigen::Map<Eigen::VectorXd>(means.data(), 10);
    const auto vc = visitation_correlation(visited, points, mean, 10);
    ASSERT_TRUE(vc.pooled);
    EXPECT_NEAR(vc.pooled->r, 1.0, 1e-12);
    ASSERT_EQ(vc.cells.size(), 10u);
    EXPECT_EQ(vc.cells[3].visits, 3);
}

TEST(Visitation, ConstantUtilityIsUndefined) {
    std::vector<Eigen::VectorXd> visited{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.5, 0.9), Eigen::Vector2d(0.7, 0.3)};
    std::vector<Eigen::VectorXd> points{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.5, 0.9), Eigen::Vector2d(0.7, 0.3)};
    const auto vc = visitation_correlation(visited, points, Eigen::Vector3d::Constant(0.4), 10);
    EXPECT_FALSE(vc.pooled.has_value());
}

TEST(Visitation, EmptyBinsAreLeftOut) {
    std::vector<Eigen::VectorXd> visited{Eigen::VectorXd::Constant(1, 0.05)};
    std::vector<Eigen::VectorXd> points{Eigen::VectorXd::Constant(1, 0.05), Eigen::VectorXd::Constant(1, 0.95)};
    const auto vc = visitation_correlation(visited, points, Eigen::Vector2d(1.0, 0.0), 10);
    int with_utility = 0;
    for (const auto & c : vc.cells) with_utility += c.mean_utility.has_value();
    EXPECT_EQ(with_utility, 2);
}
