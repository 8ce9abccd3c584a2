#include "linecospar/stats.hpp"

#include "linecospar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linecospar {

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete_beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
    if (!(dof > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

std::optional<Correlation> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("pearson: samples differ in length");
    const std::size_t n = x.size();
    if (n < 3) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    Correlation c;
    c.n = n;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = static_cast<double>(n - 2);
    const double denom = 1.0 - c.r * c.r;
    const double t = denom <= 0.0 ? std::numeric_limits<double>::infinity() : c.r * std::sqrt(dof / denom);
    c.p = student_t_two_sided(t, dof);
    return c;
}

int bin_of(double x, int bins) {
    const int b = static_cast<int>(std::floor(x * bins));
    return std::clamp(b, 0, bins - 1);
}

VisitationCorrelation visitation_correlation(std::span<const Eigen::VectorXd> visited,
                                             std::span<const Eigen::VectorXd> posterior_points,
                                             const Eigen::VectorXd & posterior_mean, int bins) {
    if (bins < 1) throw InvalidArgument("need at least one bin");
    if (static_cast<Eigen::Index>(posterior_points.size()) != posterior_mean.size())
        throw DimensionMismatch("posterior points and means differ in length");
    int dims = 0;
    if (!visited.empty())
        dims = static_cast<int>(visited.front().size());
    else if (!posterior_points.empty())
        dims = static_cast<int>(posterior_points.front().size());

    VisitationCorrelation out;
    std::vector<double> pooled_visits, pooled_utility;
    for (int d = 0; d < dims; ++d) {
        std::vector<int> counts(bins, 0);
        std::vector<double> sums(bins, 0.0);
        std::vector<int> members(bins, 0);
        for (const auto & v : visited) {
            if (v.size() != dims) throw DimensionMismatch("visited actions differ in dimension");
            ++counts[bin_of(v[d], bins)];
        }
        for (std::size_t i = 0; i < posterior_points.size(); ++i) {
            const int b = bin_of(posterior_points[i][d], bins);
            sums[b] += posterior_mean[static_cast<Eigen::Index>(i)];
            ++members[b];
        }
        std::vector<double> dim_visits, dim_utility;
        for (int b = 0; b < bins; ++b) {
            BinCell cell{d, b, counts[b], std::nullopt};
            if (members[b] > 0) {
                cell.mean_utility = sums[b] / members[b];
                dim_visits.push_back(counts[b]);
                dim_utility.push_back(*cell.mean_utility);
            }
            out.cells.push_back(cell);
        }
        out.per_dim.push_back(pearson(dim_visits, dim_utility));
        pooled_visits.insert(pooled_visits.end(), dim_visits.begin(), dim_visits.end());
        pooled_utility.insert(pooled_utility.end(), dim_utility.begin(), dim_utility.end());
    }
    out.pooled = pearson(pooled_visits, pooled_utility);
    return out;
}

}  // namespace linecospar
