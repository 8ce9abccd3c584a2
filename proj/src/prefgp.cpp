#include "linecospar/prefgp.hpp"

#include "linecospar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace linecospar {

void GpConfig::validate() const {
    if (!(lengthscale > 0.0)) throw InvalidArgument("lengthscale must be positive");
    if (!(signal_variance > 0.0)) throw InvalidArgument("signal variance must be positive");
    if (!(noise_variance > 0.0)) throw InvalidArgument("noise variance must be positive");
    if (!(preference_noise > 0.0)) throw InvalidArgument("preference noise c must be positive");
    if (!(newton_tol > 0.0)) throw InvalidArgument("Newton tolerance must be positive");
    if (newton_max_iter < 1) throw InvalidArgument("Newton iteration limit must be at least 1");
}

// ---------------------------------------------------------------------------
// PreferenceDataset

void PreferenceDataset::insert(const Action & a) {
    if (a.id == kUnassignedId) throw InvalidArgument("preference records need actions with assigned ids");
    auto it = by_id_.find(a.id);
    if (it != by_id_.end()) {
        if (!coords_equal(actions_[it->second].coords, a.coords))
            throw InvalidArgument("action id " + std::to_string(a.id) + " reused with different coordinates");
        return;
    }
    by_id_.emplace(a.id, actions_.size());
    actions_.push_back(a);
}

void PreferenceDataset::add(const Action & winner, const Action & loser, FeedbackSource source) {
    if (winner.id == loser.id) throw InvalidArgument("a preference needs two distinct actions");
    insert(winner);
    insert(loser);
    records_.push_back({winner.id, loser.id, source});
}

const Action * PreferenceDataset::find(ActionId id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &actions_[it->second];
}

const Action * PreferenceDataset::find_coords(const Eigen::VectorXd & coords) const {
    for (const auto & a : actions_)
        if (coords_equal(a.coords, coords)) return &a;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Kernel and link

PointIndex index_points(std::span<const Action> points) {
    PointIndex index;
    index.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        index.emplace(points[i].id, static_cast<Eigen::Index>(i));
    return index;
}

double se_kernel(const Action & x, const Action & y, const GpConfig & cfg) {
    const double sq = (x.coords - y.coords).squaredNorm();
    double k = cfg.signal_variance * std::exp(-sq / (2.0 * cfg.lengthscale * cfg.lengthscale));
    if (same_point(x, y)) k += cfg.noise_variance;
    return k;
}

Eigen::MatrixXd build_prior(std::span<const Action> points, const GpConfig & cfg) {
    const auto n = static_cast<Eigen::Index>(points.size());
    const double inv_two_l2 = 1.0 / (2.0 * cfg.lengthscale * cfg.lengthscale);
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto & xj = points[j].coords;
        k(j, j) = cfg.signal_variance + cfg.noise_variance;
        // Squared distances first, then one vectorized exp per column.
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double sq = (points[i].coords - xj).squaredNorm();
            if (sq <= kPointTolerance * kPointTolerance * static_cast<double>(xj.size()) &&
                same_point(points[i], points[j]))
                throw SingularPrior("points " + std::to_string(i) + " and " + std::to_string(j) +
                                    " coincide; the prior Gram matrix would be singular");
            k(i, j) = sq;
        }
        auto below = k.col(j).tail(n - j - 1).array();
        below = cfg.signal_variance * (-inv_two_l2 * below).exp();
    }
    k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
    return k;
}

JitteredCholesky factor_prior(const Eigen::MatrixXd & prior) {
    JitteredCholesky f;
    if (!jittered_cholesky(prior, f))
        throw SingularPrior("prior Gram matrix is not factorizable even with maximum jitter");
    return f;
}

double sigmoid_link(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------
// Likelihood in utility space

namespace {

struct RecordPositions {
    std::vector<Eigen::Index> winner;
    std::vector<Eigen::Index> loser;
};

RecordPositions locate(const PreferenceDataset & data, const PointIndex & index) {
    RecordPositions pos;
    pos.winner.reserve(data.size());
    pos.loser.reserve(data.size());
    for (const auto & r : data.records()) {
        auto w = index.find(r.winner_id);
        auto l = index.find(r.loser_id);
        if (w == index.end() || l == index.end())
            throw MissingAction("preference record refers to action " +
                                std::to_string(w == index.end() ? r.winner_id : r.loser_id) +
                                " which is not among the posterior points");
        pos.winner.push_back(w->second);
        pos.loser.push_back(l->second);
    }
    return pos;
}

}  // namespace

double log_likelihood(const Eigen::VectorXd & f, const PreferenceDataset & data, const PointIndex & index,
                      const GpConfig & cfg) {
    const auto pos = locate(data, index);
    double sum = 0.0;
    for (std::size_t k = 0; k < pos.winner.size(); ++k)
        sum += log_sigmoid((f[pos.winner[k]] - f[pos.loser[k]]) / cfg.preference_noise);
    return sum;
}

Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd & f, const PreferenceDataset & data,
                                        const PointIndex & index, const GpConfig & cfg) {
    const auto pos = locate(data, index);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(f.size());
    const double c = cfg.preference_noise;
    for (std::size_t k = 0; k < pos.winner.size(); ++k) {
        const double z = (f[pos.winner[k]] - f[pos.loser[k]]) / c;
        const double h = sigmoid_link(-z) / c;
        g[pos.winner[k]] += h;
        g[pos.loser[k]] -= h;
    }
    return g;
}

Eigen::MatrixXd likelihood_hessian(const Eigen::VectorXd & f, const PreferenceDataset & data,
                                   const PointIndex & index, const GpConfig & cfg) {
    const auto pos = locate(data, index);
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(f.size(), f.size());
    const double c = cfg.preference_noise;
    for (std::size_t k = 0; k < pos.winner.size(); ++k) {
        const double z = (f[pos.winner[k]] - f[pos.loser[k]]) / c;
        const double d = sigmoid_link(z) * sigmoid_link(-z) / (c * c);
        const auto w = pos.winner[k];
        const auto l = pos.loser[k];
        lambda(w, w) += d;
        lambda(l, l) += d;
        lambda(w, l) -= d;
        lambda(l, w) -= d;
    }
    return lambda;
}

double log_posterior(const Eigen::VectorXd & f, const JitteredCholesky & prior, const PreferenceDataset & data,
                     const PointIndex & index, const GpConfig & cfg) {
    const Eigen::VectorXd half = prior.lower().solve(f);
    return -0.5 * half.squaredNorm() + log_likelihood(f, data, index, cfg);
}

Eigen::VectorXd log_posterior_gradient(const Eigen::VectorXd & f, const JitteredCholesky & prior,
                                       const PreferenceDataset & data, const PointIndex & index,
                                       const GpConfig & cfg) {
    const Eigen::VectorXd kinv_f = prior.upper().solve(prior.lower().solve(f));
    return -kinv_f + log_likelihood_gradient(f, data, index, cfg);
}

// ---------------------------------------------------------------------------
// Laplace approximation

namespace {

// Record-space quantities at the current iterate α (z = G α).
struct LinkTerms {
    Eigen::VectorXd slope;      // d/dz log g(z) = g(-z)
    Eigen::VectorXd curvature;  // -d²/dz² log g(z) = g(z) g(-z)
};

LinkTerms link_terms(const Eigen::VectorXd & z) {
    LinkTerms t{Eigen::VectorXd(z.size()), Eigen::VectorXd(z.size())};
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        const double up = sigmoid_link(z[k]);
        const double down = sigmoid_link(-z[k]);
        t.slope[k] = down;
        t.curvature[k] = up * down;
    }
    return t;
}

double record_objective(const Eigen::VectorXd & alpha, const Eigen::VectorXd & z) {
    double ll = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) ll += log_sigmoid(z[k]);
    return -0.5 * alpha.dot(z) + ll;
}

// ‖Mᵀ v‖∞, where Mᵀ scatters v_k/c to the winner (+) and loser (-) of record k.
double scattered_max_norm(const Eigen::VectorXd & v, const RecordPositions & pos, Eigen::Index n_points, double c) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_points);
    for (std::size_t k = 0; k < pos.winner.size(); ++k) {
        g[pos.winner[k]] += v[k] / c;
        g[pos.loser[k]] -= v[k] / c;
    }
    return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
}

// I + D^½ G D^½
Eigen::MatrixXd newton_system(const Eigen::MatrixXd & gram, const Eigen::VectorXd & sqrt_d) {
    Eigen::MatrixXd b = sqrt_d.asDiagonal() * gram * sqrt_d.asDiagonal();
    b.diagonal().array() += 1.0;
    return b;
}

}  // namespace

UtilityPosterior laplace_posterior(std::span<const Action> points, const PreferenceDataset & data,
                                   const GpConfig & cfg, const NewtonObserver * observer) {
    cfg.validate();
    if (points.empty()) throw InvalidArgument("laplace_posterior needs at least one point");

    const PointIndex index = index_points(points);
    if (index.size() != points.size()) throw SingularPrior("posterior points must have distinct ids");
    const RecordPositions pos = locate(data, index);

    UtilityPosterior post;
    post.points.assign(points.begin(), points.end());
    post.covariance = build_prior(points, cfg);

    const auto n_points = static_cast<Eigen::Index>(points.size());
    const auto n_records = static_cast<Eigen::Index>(data.size());
    if (n_records == 0) {
        post.mean = Eigen::VectorXd::Zero(n_points);
        return post;
    }

    const double c = cfg.preference_noise;
    const Eigen::MatrixXd & k = post.covariance;

    // K Mᵀ: column r is (K[:, winner_r] - K[:, loser_r]) / c.
    Eigen::MatrixXd k_mt(n_points, n_records);
    for (Eigen::Index r = 0; r < n_records; ++r)
        k_mt.col(r) = (k.col(pos.winner[r]) - k.col(pos.loser[r])) / c;

    // G = M K Mᵀ
    Eigen::MatrixXd gram(n_records, n_records);
    for (Eigen::Index r = 0; r < n_records; ++r)
        gram.row(r) = (k_mt.row(pos.winner[r]) - k_mt.row(pos.loser[r])) / c;
    gram = 0.5 * (gram + gram.transpose()).eval();

    auto notify = [&](const Eigen::VectorXd & alpha) {
        if (observer && *observer) (*observer)(k_mt * alpha);
    };

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n_records);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_records);
    double objective = record_objective(alpha, z);
    notify(alpha);

    int iter = 0;
    double grad_norm = 0.0;
    for (;; ++iter) {
        const LinkTerms t = link_terms(z);
        grad_norm = scattered_max_norm(t.slope - alpha, pos, n_points, c);
        if (grad_norm < cfg.newton_tol) break;
        if (iter >= cfg.newton_max_iter)
            throw NoConvergence("Newton iteration for the Laplace mode did not converge in " +
                                    std::to_string(cfg.newton_max_iter) + " steps; gradient norm " +
                                    std::to_string(grad_norm),
                                grad_norm);

        // Full Newton step: α⁺ = (I + D G)⁻¹ (D z + h), via Woodbury on the
        // symmetric system I + D^½ G D^½.
        const Eigen::VectorXd sqrt_d = t.curvature.cwiseSqrt();
        const Eigen::LLT<Eigen::MatrixXd> llt(newton_system(gram, sqrt_d));
        const Eigen::VectorXd b = t.curvature.cwiseProduct(z) + t.slope;
        const Eigen::VectorXd inner = llt.solve(sqrt_d.cwiseProduct(gram * b));
        const Eigen::VectorXd step = b - sqrt_d.cwiseProduct(inner) - alpha;

        const double floor = objective - 1e-12 * std::max(1.0, std::abs(objective));
        double eta = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving, eta *= 0.5) {
            Eigen::VectorXd trial = alpha + eta * step;
            Eigen::VectorXd trial_z = gram * trial;
            const double value = record_objective(trial, trial_z);
            if (value >= floor) {
                alpha = std::move(trial);
                z = std::move(trial_z);
                objective = value;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw NoConvergence("Newton line search stalled with gradient norm " + std::to_string(grad_norm),
                                grad_norm);
        }
        notify(alpha);
    }

    post.mean = k_mt * alpha;
    post.newton_iterations = iter;
    post.gradient_norm = grad_norm;

    // Σ = K - K Mᵀ D^½ B⁻¹ D^½ M K = K - A Aᵀ with A = K Mᵀ D^½ L_B⁻ᵀ.
    const LinkTerms t = link_terms(z);
    const Eigen::VectorXd sqrt_d = t.curvature.cwiseSqrt();
    const Eigen::LLT<Eigen::MatrixXd> llt(newton_system(gram, sqrt_d));
    Eigen::MatrixXd a_t = (k_mt * sqrt_d.asDiagonal()).transpose();
    llt.matrixL().solveInPlace(a_t);
    post.covariance.selfadjointView<Eigen::Lower>().rankUpdate(a_t.transpose(), -1.0);
    post.covariance.triangularView<Eigen::StrictlyUpper>() = post.covariance.transpose();
    return post;
}

Eigen::VectorXd sample_utility(const UtilityPosterior & post, std::mt19937_64 & rng) {
    const auto n = post.mean.size();
    if (n == 0 || post.covariance.isZero(0.0)) return post.mean;

    JitteredCholesky chol;
    if (!jittered_cholesky(post.covariance, chol))
        throw SingularCovariance("posterior covariance is not factorizable even with maximum jitter");

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    return post.mean + chol.lower() * z;
}

}  // namespace linecospar
