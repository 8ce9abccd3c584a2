#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace linecospar {

struct Correlation {
    double r = 0.0;
    double p = 1.0;  // two-sided, t-test with n - 2 degrees of freedom
    std::size_t n = 0;
};

// Pearson correlation with its two-sided p-value. Empty when fewer than three
// pairs are given or either sample has zero variance.
std::optional<Correlation> pearson(std::span<const double> x, std::span<const double> y);

// Regularized incomplete beta I_x(a, b) via the continued fraction expansion.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t statistic with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

struct BinCell {
    int dim = 0;
    int bin = 0;
    int visits = 0;
    std::optional<double> mean_utility;  // empty when no posterior point falls in the bin
};

struct VisitationCorrelation {
    std::vector<BinCell> cells;  // dim-major, bins in increasing order
    std::vector<std::optional<Correlation>> per_dim;
    std::optional<Correlation> pooled;  // over every (dim, bin) cell with a utility
};

// Bins every visited action per dimension into `bins` equal-width bins of
// [0,1] and pairs the counts with the mean posterior utility of the points
// falling into the same bin.
VisitationCorrelation visitation_correlation(std::span<const Eigen::VectorXd> visited,
                                             std::span<const Eigen::VectorXd> posterior_points,
                                             const Eigen::VectorXd & posterior_mean, int bins);

int bin_of(double x, int bins);

}  // namespace linecospar
