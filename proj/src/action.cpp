#include "linecospar/action.hpp"

#include "linecospar/errors.hpp"

#include <cmath>

namespace linecospar {

bool coords_equal(const Eigen::VectorXd & a, const Eigen::VectorXd & b, double tol) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

bool same_point(const Action & a, const Action & b) {
    if (a.id != kUnassignedId && a.id == b.id) return true;
    return coords_equal(a.coords, b.coords);
}

bool in_unit_cube(const Eigen::VectorXd & coords, double tol) {
    for (Eigen::Index i = 0; i < coords.size(); ++i)
        if (!(coords[i] >= -tol && coords[i] <= 1.0 + tol)) return false;
    return true;
}

void ActionSpace::validate() const {
    if (lower.size() == 0) throw InvalidArgument("action space has no dimensions");
    if (lower.size() != upper.size())
        throw InvalidArgument("action space lower/upper bounds differ in length");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
            throw InvalidArgument("action space bound " + std::to_string(i) + " is not a finite interval with lower < upper");
    }
    if (granularity < 2) throw InvalidArgument("granularity must be at least 2");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != lower.size())
        throw InvalidArgument("parameter names must match the number of dimensions");
    if (!units.empty() && static_cast<Eigen::Index>(units.size()) != lower.size())
        throw InvalidArgument("parameter units must match the number of dimensions");
}

Eigen::VectorXd ActionSpace::normalize(const Eigen::VectorXd & physical) const {
    if (physical.size() != lower.size()) throw DimensionMismatch("normalize: wrong number of coordinates");
    return ((physical - lower).array() / (upper - lower).array()).matrix();
}

Eigen::VectorXd ActionSpace::denormalize(const Eigen::VectorXd & normalized) const {
    if (normalized.size() != lower.size()) throw DimensionMismatch("denormalize: wrong number of coordinates");
    // Clamped so that rounding never pushes a cube point past the box.
    const Eigen::VectorXd x = lower + (normalized.array() * (upper - lower).array()).matrix();
    return in_unit_cube(normalized) ? x.cwiseMax(lower).cwiseMin(upper) : x;
}

ActionSpace ActionSpace::unit(int dims, int granularity) {
    ActionSpace s;
    s.lower = Eigen::VectorXd::Zero(dims);
    s.upper = Eigen::VectorXd::Ones(dims);
    s.granularity = granularity;
    return s;
}

ActionSpace ActionSpace::exoskeleton() {
    ActionSpace s;
    s.lower.resize(6);
    s.upper.resize(6);
    s.lower << 0.08, 0.85, 0.25, 0.065, 5.5, 10.5;
    s.upper << 0.18, 1.15, 0.30, 0.075, 9.5, 14.5;
    // 0.01 m resolution on step length.
    s.granularity = 11;
    s.names = {"step_length_m", "step_duration_s", "step_width_m",
               "max_step_height_m", "pelvis_roll_deg", "pelvis_pitch_deg"};
    s.units = {"m", "s", "m", "m", "deg", "deg"};
    return s;
}

}  // namespace linecospar
