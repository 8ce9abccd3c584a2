#include "linecospar/linalg.hpp"

namespace linecospar {

namespace {

bool try_factor(Eigen::MatrixXd & a) {
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(a);
    return llt.info() == Eigen::Success;
}

}  // namespace

bool jittered_cholesky(const Eigen::MatrixXd & a, JitteredCholesky & out) {
    out.factor = a;
    out.jitter = 0.0;
    if (try_factor(out.factor)) return true;
    for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-9); jitter *= 10.0) {
        out.factor = a;
        out.factor.diagonal().array() += jitter;
        out.jitter = jitter;
        if (try_factor(out.factor)) return true;
    }
    return false;
}

}  // namespace linecospar
