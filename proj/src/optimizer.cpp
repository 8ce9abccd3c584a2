#include "linecospar/optimizer.hpp"

#include "linecospar/errors.hpp"

#include <chrono>
#include <cmath>
#include <unordered_set>

namespace linecospar {

namespace {

// Appends the actions of W that are not already among `points` (by id or by
// coordinates), keeping W's insertion order.
void append_store(std::vector<Action> & points, const PreferenceDataset & data) {
    std::unordered_set<ActionId> seen;
    for (const auto & p : points) seen.insert(p.id);
    for (const auto & w : data.actions()) {
        if (seen.count(w.id)) continue;
        bool duplicate = false;
        for (const auto & p : points) {
            if (coords_equal(p.coords, w.coords)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            points.push_back(w);
            seen.insert(w.id);
        }
    }
}

}  // namespace

void OptimizerConfig::validate() const {
    if (dims < 1) throw InvalidArgument("optimizer needs at least one dimension");
    if (granularity < 1) throw InvalidArgument("granularity must be positive");
    if (mode == CandidateMode::FullGrid && granularity < 2)
        throw InvalidArgument("the full grid needs granularity of at least 2");
    gp.validate();
}

Eigen::Index argmax_first(const Eigen::VectorXd & values) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::vector<Eigen::VectorXd> full_grid(int dims, int granularity) {
    if (std::pow(static_cast<double>(granularity), dims) > kMaxGridPoints)
        throw GridTooLarge("grid of " + std::to_string(granularity) + "^" + std::to_string(dims) +
                           " points exceeds the limit of 1e5");
    std::vector<Eigen::VectorXd> grid;
    std::vector<int> idx(dims, 0);
    const double step = 1.0 / (granularity - 1);
    for (;;) {
        Eigen::VectorXd p(dims);
        for (int i = 0; i < dims; ++i) p[i] = idx[i] * step;
        grid.push_back(std::move(p));
        int axis = dims - 1;
        while (axis >= 0 && ++idx[axis] == granularity) idx[axis--] = 0;
        if (axis < 0) break;
    }
    return grid;
}

Optimizer::Optimizer(OptimizerConfig config, std::uint64_t seed) : config_(std::move(config)), rng_(seed) {
    config_.validate();
    if (config_.mode == CandidateMode::FullGrid) {
        for (auto & p : full_grid(config_.dims, config_.granularity)) grid_.push_back({next_id_++, std::move(p)});
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    incumbent_.coords.resize(config_.dims);
    for (int i = 0; i < config_.dims; ++i) incumbent_.coords[i] = unif(rng_);
    incumbent_.id = next_id_++;
}

const Action * Optimizer::known_action(const Eigen::VectorXd & coords) const {
    if (const Action * known = dataset_.find_coords(coords)) return known;
    // The previous action joins W only once its comparison is recorded.
    if (last_action_ && coords_equal(last_action_->coords, coords)) return &*last_action_;
    return nullptr;
}

Action Optimizer::resolve(const Eigen::VectorXd & coords) {
    if (const Action * known = known_action(coords)) return *known;
    if (posterior_) {
        for (const auto & p : posterior_->points)
            if (coords_equal(p.coords, coords)) return p;
    }
    return Action{next_id_++, coords};
}

std::vector<Action> Optimizer::candidate_set(const std::optional<LineSubspace> & line) {
    std::vector<Action> points;
    if (config_.mode == CandidateMode::FullGrid) {
        points = grid_;
    } else if (line) {
        points.reserve(line->points.size() + dataset_.actions().size());
        for (const auto & p : line->points) {
            if (p.id != kUnassignedId) {
                points.push_back(p);
            } else if (const Action * known = known_action(p.coords)) {
                points.push_back(*known);
            } else {
                points.push_back({next_id_++, p.coords});
            }
        }
    }
    append_store(points, dataset_);
    return points;
}

const Action & Optimizer::propose_next() {
    if (pending_) throw StaleFeedback("a proposal is already pending; submit feedback first");

    // Work on copies so a numerical failure leaves the state untouched.
    std::mt19937_64 rng = rng_;
    const ActionId saved_next_id = next_id_;
    try {
        std::optional<LineSubspace> line;
        if (config_.mode == CandidateMode::Line) line = random_line(incumbent_, config_.granularity, rng);
        std::vector<Action> points = candidate_set(line);
        UtilityPosterior post = laplace_posterior(points, dataset_, config_.gp);
        const Eigen::VectorXd f = sample_utility(post, rng);
        const Action chosen = post.points[argmax_first(f)];

        // Line points carry their merged ids from here on.
        if (line) {
            for (std::size_t i = 0; i < line->points.size(); ++i) line->points[i] = post.points[i];
        }
        rng_ = rng;
        current_line_ = std::move(line);
        posterior_ = std::move(post);
        pending_ = chosen;
        return *pending_;
    } catch (...) {
        next_id_ = saved_next_id;
        throw;
    }
}

void Optimizer::absorb_feedback(const Action & proposed, const FeedbackBundle & feedback) {
    if (!pending_ || pending_->id != proposed.id || !coords_equal(pending_->coords, proposed.coords))
        throw StaleFeedback("feedback does not refer to the pending proposal");
    if (feedback.coactive) {
        if (feedback.coactive->size() != config_.dims)
            throw DimensionMismatch("coactive action has the wrong number of coordinates");
        if (!in_unit_cube(*feedback.coactive)) throw InvalidArgument("coactive action lies outside the unit cube");
    }

    const Action current = *pending_;
    // Re-executing the previous action compares it with itself: nothing to record.
    if (last_action_ && feedback.preference != Preference::NoPreference && !same_point(current, *last_action_)) {
        if (feedback.preference == Preference::FirstPreferred)
            dataset_.add(current, *last_action_, feedback.preference_source);
        else
            dataset_.add(*last_action_, current, feedback.preference_source);
    }
    if (feedback.coactive && !coords_equal(*feedback.coactive, current.coords)) {
        const Action improved = resolve(*feedback.coactive);
        if (improved.id != current.id) dataset_.add(improved, current, FeedbackSource::CoactiveImprovement);
    }

    // Incumbent from μ_t, the posterior fitted before this feedback.
    incumbent_ = posterior_->points[argmax_first(posterior_->mean)];
    last_action_ = current;
    pending_.reset();
    ++iteration_;
}

std::vector<Action> Optimizer::evidence_points() const {
    std::vector<Action> points;
    if (config_.mode == CandidateMode::FullGrid) {
        points = grid_;
    } else if (current_line_) {
        points = current_line_->points;
    } else {
        points.push_back(incumbent_);
    }
    append_store(points, dataset_);
    return points;
}

UtilityPosterior Optimizer::evidence_posterior() const {
    return laplace_posterior(evidence_points(), dataset_, config_.gp);
}

Action Optimizer::posterior_max() const {
    const UtilityPosterior post = evidence_posterior();
    return post.points[argmax_first(post.mean)];
}

std::vector<IterationStat> run_baseline_grid(const ActionSpace & space, const GpConfig & gp,
                                             const FeedbackOracle & oracle, int iterations, std::uint64_t seed) {
    space.validate();
    if (iterations < 1) throw InvalidArgument("baseline needs at least one iteration");
    OptimizerConfig cfg;
    cfg.dims = space.dims();
    cfg.granularity = space.granularity;
    cfg.gp = gp;
    cfg.mode = CandidateMode::FullGrid;
    Optimizer opt(cfg, seed);

    using clock = std::chrono::steady_clock;
    std::vector<IterationStat> trace;
    trace.reserve(iterations);
    for (int t = 0; t < iterations; ++t) {
        const auto t0 = clock::now();
        const Action action = opt.propose_next();
        const auto t1 = clock::now();
        const FeedbackBundle fb = oracle(action, opt.last_action() ? &*opt.last_action() : nullptr);
        const auto t2 = clock::now();
        const std::size_t v_size = opt.posterior()->size();
        opt.absorb_feedback(action, fb);
        const auto t3 = clock::now();
        const double ms = std::chrono::duration<double, std::milli>((t1 - t0) + (t3 - t2)).count();
        trace.push_back({action, v_size, ms});
    }
    return trace;
}

}  // namespace linecospar
