#pragma once

#include "linecospar/action.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace linecospar {

// A discretized random line through an anchor point of [0,1]^d.
struct LineSubspace {
    Action anchor;
    Eigen::VectorXd direction;  // unit norm
    std::vector<Action> points;  // ordered by line parameter; the anchor keeps its id
    std::vector<double> params;  // line parameter s of each point: point = anchor + s·direction
    Eigen::Index anchor_index = 0;
};

// Uniform direction on the unit sphere (normalized Gaussian draw).
Eigen::VectorXd random_direction(int dims, std::mt19937_64 & rng);

// Points anchor + k·Δ·direction, Δ = 1/(m-1), for every integer k whose point
// stays in the cube. At most m points survive; the far ends are trimmed so the
// segment stays centred on the anchor. m = 1 yields the anchor alone.
// Throws DegenerateLine when the clipped line has zero length.
LineSubspace discretize_line(const Action & anchor, const Eigen::VectorXd & direction, int granularity);

// random_direction + discretize_line, redrawing the direction on DegenerateLine
// (up to max_attempts times).
LineSubspace random_line(const Action & anchor, int granularity, std::mt19937_64 & rng, int max_attempts = 100);

}  // namespace linecospar
