#pragma once

#include "linecospar/action.hpp"
#include "linecospar/linalg.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

namespace linecospar {

struct GpConfig {
    double lengthscale = 0.15;
    double signal_variance = 1e-4;
    double noise_variance = 1e-5;   // added on the kernel diagonal
    double preference_noise = 0.005;  // c in g((f1 - f2) / c)
    double newton_tol = 1e-6;
    int newton_max_iter = 100;

    // Throws InvalidArgument unless every variance, c, the lengthscale and the
    // tolerance are strictly positive.
    void validate() const;
};

enum class FeedbackSource { HumanPreference, CoactiveImprovement, Simulated };

struct PreferenceRecord {
    ActionId winner_id;
    ActionId loser_id;
    FeedbackSource source;
};

// The preference data D together with the store W of every action that some
// record refers to.
class PreferenceDataset {
  public:
    // Appends winner ≻ loser, inserting either action into the store if it is
    // not there yet. Both actions must carry assigned ids.
    void add(const Action & winner, const Action & loser, FeedbackSource source);

    const std::vector<PreferenceRecord> & records() const { return records_; }
    const std::vector<Action> & actions() const { return actions_; }

    const Action * find(ActionId id) const;
    const Action * find_coords(const Eigen::VectorXd & coords) const;

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

  private:
    void insert(const Action & a);

    std::vector<PreferenceRecord> records_;
    std::vector<Action> actions_;
    std::unordered_map<ActionId, std::size_t> by_id_;
};

// Laplace approximation N(mean, covariance) of the utilities over `points`.
struct UtilityPosterior {
    std::vector<Action> points;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    int newton_iterations = 0;
    double gradient_norm = 0.0;  // ‖∇ log posterior‖∞ at the returned mode

    std::size_t size() const { return points.size(); }
};

using PointIndex = std::unordered_map<ActionId, Eigen::Index>;

PointIndex index_points(std::span<const Action> points);

double se_kernel(const Action & x, const Action & y, const GpConfig & cfg);

// Gram matrix of se_kernel over the points. Throws SingularPrior if two
// distinct ids share coordinates (the matrix would be exactly singular).
Eigen::MatrixXd build_prior(std::span<const Action> points, const GpConfig & cfg);

// Jittered Cholesky of a prior Gram matrix; throws SingularPrior on failure.
JitteredCholesky factor_prior(const Eigen::MatrixXd & prior);

double sigmoid_link(double x);
double log_sigmoid(double x);

// Σ_k log g((f[winner] - f[loser]) / c). Throws MissingAction if a record
// refers to an id absent from `index`.
double log_likelihood(const Eigen::VectorXd & f, const PreferenceDataset & data, const PointIndex & index,
                      const GpConfig & cfg);

Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd & f, const PreferenceDataset & data,
                                        const PointIndex & index, const GpConfig & cfg);

// Λ(f): Hessian of the negative log-likelihood.
Eigen::MatrixXd likelihood_hessian(const Eigen::VectorXd & f, const PreferenceDataset & data,
                                   const PointIndex & index, const GpConfig & cfg);

// -½ fᵀ K⁻¹ f + log_likelihood(f), with K given by its Cholesky factor.
double log_posterior(const Eigen::VectorXd & f, const JitteredCholesky & prior, const PreferenceDataset & data,
                     const PointIndex & index, const GpConfig & cfg);

Eigen::VectorXd log_posterior_gradient(const Eigen::VectorXd & f, const JitteredCholesky & prior,
                                       const PreferenceDataset & data, const PointIndex & index,
                                       const GpConfig & cfg);

// Called with the full utility vector f at every Newton iterate.
using NewtonObserver = std::function<void(const Eigen::VectorXd &)>;

// Mode of the log posterior by damped Newton from f = 0, with the covariance
// (K⁻¹ + Λ(f̂))⁻¹. Every action referenced by `data` must be among `points`.
//
// The iterates are carried in record space: every Newton iterate from f = 0
// has the form f = K Mᵀα where M is the N×V record-difference operator scaled
// by 1/c, so only N×N systems with the well-conditioned matrix
// I + D^½ (M K Mᵀ) D^½ are ever factored. K itself is never inverted.
UtilityPosterior laplace_posterior(std::span<const Action> points, const PreferenceDataset & data,
                                   const GpConfig & cfg, const NewtonObserver * observer = nullptr);

// One draw mean + L z with L Lᵀ = covariance (jittered if needed).
Eigen::VectorXd sample_utility(const UtilityPosterior & post, std::mt19937_64 & rng);

}  // namespace linecospar
