#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace linecospar {

using ActionId = std::int64_t;
inline constexpr ActionId kUnassignedId = -1;

// Two coordinates closer than this are the same point.
inline constexpr double kPointTolerance = 1e-12;

// A point of the normalized search hypercube [0,1]^d. The id is assigned the
// first time the point enters an optimizer's bookkeeping.
struct Action {
    ActionId id = kUnassignedId;
    Eigen::VectorXd coords;

    int dims() const { return static_cast<int>(coords.size()); }
};

bool coords_equal(const Eigen::VectorXd & a, const Eigen::VectorXd & b, double tol = kPointTolerance);

// Same id, or coordinates equal within kPointTolerance.
bool same_point(const Action & a, const Action & b);

bool in_unit_cube(const Eigen::VectorXd & coords, double tol = 0.0);

// Physical parameter box plus the per-line granularity m.
struct ActionSpace {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int granularity = 30;
    std::vector<std::string> names;
    std::vector<std::string> units;

    int dims() const { return static_cast<int>(lower.size()); }

    // Throws InvalidArgument when bounds are empty, mismatched, or not strictly ordered.
    void validate() const;

    Eigen::VectorXd normalize(const Eigen::VectorXd & physical) const;
    Eigen::VectorXd denormalize(const Eigen::VectorXd & normalized) const;

    // Unit hypercube of dimension d.
    static ActionSpace unit(int dims, int granularity);

    // The six exoskeleton gait parameters: step length, step duration, step
    // width, maximum step height, pelvis roll and pelvis pitch.
    static ActionSpace exoskeleton();
};

}  // namespace linecospar
