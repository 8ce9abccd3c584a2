#pragma once

#include "linecospar/action.hpp"
#include "linecospar/prefgp.hpp"
#include "linecospar/subspace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace linecospar {

// Outcome of comparing the action just executed (first) with the one executed
// before it (second).
enum class Preference { FirstPreferred, SecondPreferred, NoPreference };

struct FeedbackBundle {
    Preference preference = Preference::NoPreference;
    // Improved action a'_t in normalized coordinates, if the user suggested one.
    std::optional<Eigen::VectorXd> coactive;
    FeedbackSource preference_source = FeedbackSource::Simulated;
};

enum class CandidateMode {
    Line,      // V_t = L_t ∪ W
    FullGrid,  // V_t = the m^d grid ∪ W (baseline)
};

inline constexpr double kMaxGridPoints = 1e5;

struct OptimizerConfig {
    int dims = 1;
    int granularity = 30;
    GpConfig gp;
    CandidateMode mode = CandidateMode::Line;

    void validate() const;
};

// Self-sparring preference optimizer over random lines. Each iteration is a
// strict propose_next() / absorb_feedback() pair.
class Optimizer {
  public:
    Optimizer(OptimizerConfig config, std::uint64_t seed);

    // Builds V_t, fits the Laplace posterior, draws f_t and returns argmax f_t
    // (lowest index on ties). On error the state is left as it was.
    const Action & propose_next();

    // Records the preference between the pending proposal and the previous
    // action (skipped at t = 1 and for NoPreference), the optional coactive
    // improvement, and moves the incumbent to argmax μ_t over V_t. Throws
    // StaleFeedback unless `proposed` is the pending proposal.
    void absorb_feedback(const Action & proposed, const FeedbackBundle & feedback);

    // Posterior over the current candidates ∪ W, recomputed from the data.
    UtilityPosterior evidence_posterior() const;

    // argmax of evidence_posterior().mean, lowest index on ties.
    Action posterior_max() const;

    const OptimizerConfig & config() const { return config_; }
    int iteration() const { return iteration_; }
    const Action & incumbent() const { return incumbent_; }
    const PreferenceDataset & dataset() const { return dataset_; }
    const std::optional<LineSubspace> & current_line() const { return current_line_; }
    const std::optional<UtilityPosterior> & posterior() const { return posterior_; }
    const std::optional<Action> & last_action() const { return last_action_; }
    const std::optional<Action> & pending() const { return pending_; }
    const std::mt19937_64 & rng() const { return rng_; }

  private:
    std::vector<Action> candidate_set(const std::optional<LineSubspace> & line);
    std::vector<Action> evidence_points() const;
    // W or the previous action at these coordinates, so ids stay unique per point.
    const Action * known_action(const Eigen::VectorXd & coords) const;
    Action resolve(const Eigen::VectorXd & coords);

    OptimizerConfig config_;
    std::mt19937_64 rng_;
    ActionId next_id_ = 0;
    int iteration_ = 1;
    Action incumbent_;
    PreferenceDataset dataset_;
    std::vector<Action> grid_;
    std::optional<LineSubspace> current_line_;
    std::optional<UtilityPosterior> posterior_;
    std::optional<Action> last_action_;
    std::optional<Action> pending_;
};

// Index of the largest entry, lowest index on ties.
Eigen::Index argmax_first(const Eigen::VectorXd & values);

// Every point of the regular m^d grid on [0,1]^d, in row-major order of the
// per-axis indices. Throws GridTooLarge above kMaxGridPoints.
std::vector<Eigen::VectorXd> full_grid(int dims, int granularity);

// Supplies feedback for the action just executed; `previous` is null at t = 1.
using FeedbackOracle = std::function<FeedbackBundle(const Action & current, const Action * previous)>;

struct IterationStat {
    Action action;
    std::size_t v_size = 0;
    double wall_ms = 0.0;  // propose_next + absorb_feedback, oracle excluded
};

// The same self-sparring loop with V_t = the full grid ∪ W every iteration.
std::vector<IterationStat> run_baseline_grid(const ActionSpace & space, const GpConfig & gp,
                                             const FeedbackOracle & oracle, int iterations, std::uint64_t seed);

}  // namespace linecospar
