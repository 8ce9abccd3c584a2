#pragma once

#include <Eigen/Dense>

namespace linecospar {

// Escalating diagonal jitter for Cholesky recovery: first attempt without
// jitter, then 1e-10, 1e-9, ... up to 1e-4.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

struct JitteredCholesky {
    // Only the lower triangle is meaningful: L Lᵀ = A + jitter·I. The strict
    // upper triangle still holds A's entries (the factorization runs in place).
    Eigen::MatrixXd factor;
    double jitter = 0.0;

    auto lower() const { return factor.triangularView<Eigen::Lower>(); }
    auto upper() const { return factor.transpose().triangularView<Eigen::Upper>(); }
};

// Returns false (leaving `out` unspecified) if the factorization fails even at
// kJitterMax.
bool jittered_cholesky(const Eigen::MatrixXd & a, JitteredCholesky & out);

}  // namespace linecospar
