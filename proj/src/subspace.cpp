#include "linecospar/subspace.hpp"

#include "linecospar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linecospar {

Eigen::VectorXd random_direction(int dims, std::mt19937_64 & rng) {
    if (dims < 1) throw InvalidArgument("random_direction: dimension must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dims);
    for (;;) {
        for (int i = 0; i < dims; ++i) v[i] = normal(rng);
        const double norm = v.norm();
        if (norm > 0.0) return v / norm;
    }
}

LineSubspace discretize_line(const Action & anchor, const Eigen::VectorXd & direction, int granularity) {
    if (granularity < 1) throw InvalidArgument("granularity must be positive");
    if (direction.size() != anchor.coords.size()) throw DimensionMismatch("line direction and anchor differ in dimension");
    if (!in_unit_cube(anchor.coords)) throw InvalidArgument("line anchor lies outside the unit cube");
    if (std::abs(direction.norm() - 1.0) > 1e-9) throw InvalidArgument("line direction must have unit norm");

    LineSubspace line;
    line.anchor = anchor;
    line.direction = direction;

    if (granularity == 1) {
        line.points.push_back(anchor);
        line.params.push_back(0.0);
        return line;
    }

    // Clip anchor + s·direction to the cube.
    double s_min = -std::numeric_limits<double>::infinity();
    double s_max = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < direction.size(); ++i) {
        const double di = direction[i];
        if (di == 0.0) continue;
        double lo = (0.0 - anchor.coords[i]) / di;
        double hi = (1.0 - anchor.coords[i]) / di;
        if (lo > hi) std::swap(lo, hi);
        s_min = std::max(s_min, lo);
        s_max = std::min(s_max, hi);
    }
    s_min = std::min(s_min, 0.0);
    s_max = std::max(s_max, 0.0);
    if (s_max - s_min <= kPointTolerance)
        throw DegenerateLine("line through the anchor leaves the cube immediately in both directions");

    const double step = 1.0 / (granularity - 1);
    const double slack = 1e-12;
    const auto k_low = static_cast<long>(std::ceil((s_min - slack) / step));
    const auto k_high = static_cast<long>(std::floor((s_max + slack) / step));

    // Trim the far ends, always dropping the end farther from the anchor
    // (ties drop the positive end first).
    long lo = k_low, hi = k_high;
    while (hi - lo + 1 > granularity) {
        if (hi >= -lo)
            --hi;
        else
            ++lo;
    }

    for (long k = lo; k <= hi; ++k) {
        Action p;
        if (k == 0) {
            p = anchor;
            line.anchor_index = static_cast<Eigen::Index>(line.points.size());
        } else {
            const double s = static_cast<double>(k) * step;
            p.coords = (anchor.coords + s * direction).cwiseMax(0.0).cwiseMin(1.0);
            if (!line.points.empty() && coords_equal(line.points.back().coords, p.coords)) continue;
        }
        line.points.push_back(std::move(p));
        line.params.push_back(static_cast<double>(k) * step);
    }
    return line;
}

LineSubspace random_line(const Action & anchor, int granularity, std::mt19937_64 & rng, int max_attempts) {
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const Eigen::VectorXd dir = random_direction(anchor.dims(), rng);
        try {
            return discretize_line(anchor, dir, granularity);
        } catch (const DegenerateLine &) {
        }
    }
    throw DegenerateLine("no non-degenerate line found through the anchor after " + std::to_string(max_attempts) +
                         " directions");
}

}  // namespace linecospar
