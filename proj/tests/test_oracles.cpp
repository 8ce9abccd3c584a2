#include "linecospar/errors.hpp"
#include "linecospar/oracles.hpp"
#include "linecospar/prefgp.hpp"

#include "reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace linecospar;

TEST(Hartmann, KnownOptimaValues) {
    Eigen::VectorXd x3(3);
    x3 << 0.114614, 0.555649, 0.852547;
    EXPECT_NEAR(evaluate(ObjectiveSpec::hartmann3(), x3), 3.86278, 1e-5);
    Eigen::VectorXd x6(6);
    x6 << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
    EXPECT_NEAR(evaluate(ObjectiveSpec::hartmann6(), x6), 3.32237, 1e-5);
    EXPECT_DOUBLE_EQ(hartmann3(x3), -evaluate(ObjectiveSpec::hartmann3(), x3));
}

TEST(Hartmann, GridRefinementOracleAgrees) {
    const auto h3 = reference::grid_refine([](const Eigen::VectorXd & x) { return -hartmann3(x); }, 3, 21);
    EXPECT_NEAR(h3.value, 3.86278, 1e-3);
    const auto h6 = reference::grid_refine([](const Eigen::VectorXd & x) { return -hartmann6(x); }, 6, 9, 64);
    EXPECT_NEAR(h6.value, 3.32237, 1e-3);
}

TEST(Hartmann, DimensionChecked) {
    EXPECT_THROW(evaluate(ObjectiveSpec::hartmann3(), Eigen::VectorXd::Zero(4)), DimensionMismatch);
    EXPECT_THROW(evaluate(ObjectiveSpec::hartmann6(), Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST(Polynomial, MatchesPrintedForm) {
    std::mt19937_64 rng(5);
    const ObjectiveSpec p = ObjectiveSpec::random_polynomial(4, rng);
    EXPECT_TRUE((p.poly_alpha.array().abs() <= 1.0).all());
    EXPECT_TRUE((p.poly_beta.array().abs() <= 1.0).all());
    const Eigen::Vector4d a(0.1, 0.5, 0.2, 0.9);
    double expected = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) expected += p.poly_alpha[i] * p.poly_beta[j] * a[j];
    EXPECT_NEAR(evaluate(p, a), expected, 1e-14);
}

TEST(Polynomial, RejectsOutOfRangeCoefficients) {
    ObjectiveSpec p{ObjectiveKind::RandomPolynomial, Eigen::Vector2d(0.5, 1.5), Eigen::Vector2d(0.1, 0.2), false};
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Names, RoundTrip) {
    for (auto k : {ObjectiveKind::Hartmann3, ObjectiveKind::Hartmann6, ObjectiveKind::RandomPolynomial})
        EXPECT_EQ(objective_kind_from_string(to_string(k)), k);
    EXPECT_THROW(objective_kind_from_string("rosenbrock"), InvalidArgument);
}

TEST(Subject, NoiselessPreferenceIsExact) {
    SimSubject s(ObjectiveSpec::hartmann3(), 0.0, false, 1);
    Eigen::VectorXd good(3), bad(3);
    good << 0.114614, 0.555649, 0.852547;
    bad << 0.9, 0.9, 0.1;
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(s.preference(good, bad), Preference::FirstPreferred);
        EXPECT_EQ(s.preference(bad, good), Preference::SecondPreferred);
    }
}

TEST(Subject, LogisticFrequencies) {
    // A linear objective lets us dial the utility gap s exactly.
    const double ch = 0.5;
    ObjectiveSpec lin{ObjectiveKind::RandomPolynomial, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0), false};
    SimSubject s(lin, ch, false, 2024);
    for (double gap : {0.0, ch}) {
        const Eigen::VectorXd a1 = Eigen::VectorXd::Constant(1, 0.2 + gap);
        const Eigen::VectorXd a2 = Eigen::VectorXd::Constant(1, 0.2);
        int first = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) first += s.preference(a1, a2) == Preference::FirstPreferred;
        const double analytic = 1.0 / (1.0 + std::exp(-gap / ch));
        EXPECT_NEAR(static_cast<double>(first) / n, analytic, 0.02);
    }
}

TEST(Subject, CoactiveOnlyWhenImproving) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SimSubject s(ObjectiveSpec::hartmann3(), 0.0, true, 8);
    int offered = 0;
    for (int i = 0; i < 500; ++i) {
        Eigen::VectorXd a(3);
        for (int j = 0; j < 3; ++j) a[j] = u(rng);
        const auto sug = s.coactive_suggestion(a, 0.1);
        if (!sug) continue;
        ++offered;
        EXPECT_GT(evaluate(s.objective(), *sug), evaluate(s.objective(), a));
        int changed = 0;
        for (int j = 0; j < 3; ++j) {
            if ((*sug)[j] != a[j]) {
                ++changed;
                EXPECT_LE(std::abs((*sug)[j] - a[j]), 0.1 + 1e-15);
            }
        }
        EXPECT_EQ(changed, 1);
        EXPECT_TRUE(in_unit_cube(*sug));
    }
    EXPECT_GT(offered, 50);
}

TEST(Subject, CoactiveAbsentAtMaximumOfLinearObjective) {
    ObjectiveSpec lin{ObjectiveKind::RandomPolynomial, Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1.0, 1.0), false};
    SimSubject s(lin, 0.0, true, 4);
    const Eigen::Vector2d top(1.0, 1.0);
    for (int i = 0; i < 50; ++i) EXPECT_FALSE(s.coactive_suggestion(top, 0.1).has_value());
}

TEST(Subject, RejectsNegativeNoise) {
    EXPECT_THROW(SimSubject(ObjectiveSpec::hartmann3(), -0.1, false, 1), InvalidArgument);
}
