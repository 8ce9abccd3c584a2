#include "linecospar/session.hpp"

#include "linecospar/errors.hpp"
#include "linecospar/harness.hpp"
#include "linecospar/stats.hpp"

#include "httplib.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace linecospar {

namespace {

constexpr std::uint64_t kValidationTag = 3;
constexpr int kCorrelationBins = 10;

// Validation trials (0-based within the phase) at which a_max is compared with
// the trial before it, and whether a_max is the newer action of that pair.
bool scored(int v) { return v == 1 || v == 2 || v == 4 || v == 5; }
bool a_max_is_current(int v) { return v == 1 || v == 4; }

json vector_json(const Eigen::VectorXd & v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from(const json & j, const char * what) {
    if (!j.is_array() || j.empty()) throw InvalidArgument(std::string(what) + " must be a non-empty array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidArgument(std::string(what) + " must contain numbers only");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

std::string rng_state(const std::mt19937_64 & rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

ActionSpace parse_space(const json & request) {
    if (!request.is_object()) throw InvalidArgument("request body must be a JSON object");
    ActionSpace space;
    if (request.contains("preset")) {
        const json & preset = request["preset"];
        if (!preset.is_string() || preset.get<std::string>() != "exoskeleton")
            throw InvalidArgument("unknown preset (expected \"exoskeleton\")");
        space = ActionSpace::exoskeleton();
    } else if (request.contains("space")) {
        const json & s = request["space"];
        if (!s.is_object()) throw InvalidArgument("space must be an object with lower and upper bounds");
        space.lower = vector_from(s.value("lower", json()), "space.lower");
        space.upper = vector_from(s.value("upper", json()), "space.upper");
        if (s.contains("names")) space.names = s["names"].get<std::vector<std::string>>();
        if (s.contains("units")) space.units = s["units"].get<std::vector<std::string>>();
        if (s.contains("granularity")) space.granularity = s["granularity"].get<int>();
    } else {
        throw InvalidArgument("request needs either \"preset\" or \"space\"");
    }
    if (request.contains("config") && request["config"].contains("granularity"))
        space.granularity = request["config"]["granularity"].get<int>();
    space.validate();
    if (!space.names.empty() && static_cast<int>(space.names.size()) != space.dims())
        throw InvalidArgument("space.names must name every dimension");
    if (!space.units.empty() && static_cast<int>(space.units.size()) != space.dims())
        throw InvalidArgument("space.units must cover every dimension");
    if (space.granularity < 2) throw InvalidArgument("granularity must be at least 2");
    return space;
}

OptimizerConfig parse_config(const json & request, const ActionSpace & space) {
    OptimizerConfig cfg;
    cfg.dims = space.dims();
    cfg.granularity = space.granularity;
    cfg.mode = CandidateMode::Line;
    if (request.contains("config")) {
        const json & c = request["config"];
        if (!c.is_object()) throw InvalidArgument("config must be an object");
        cfg.gp.lengthscale = c.value("lengthscale", cfg.gp.lengthscale);
        cfg.gp.signal_variance = c.value("signal_variance", cfg.gp.signal_variance);
        cfg.gp.noise_variance = c.value("noise_variance", cfg.gp.noise_variance);
        cfg.gp.preference_noise = c.value("preference_noise", cfg.gp.preference_noise);
    }
    cfg.validate();
    return cfg;
}

// Maps the presentation-order answer onto the optimizer's current-vs-previous form.
Preference to_preference(const std::string & answer) {
    if (answer == "second") return Preference::FirstPreferred;
    if (answer == "first") return Preference::SecondPreferred;
    return Preference::NoPreference;
}

json correlation_json(const std::optional<Correlation> & c) {
    if (!c) return nullptr;
    return json{{"r", c->r}, {"p", c->p}, {"n", c->n}};
}

}  // namespace

std::string to_string(Phase phase) {
    switch (phase) {
    case Phase::Learning: return "learning";
    case Phase::Validation: return "validation";
    case Phase::Done: return "done";
    }
    return "?";
}

Session::Session(std::string id, const json & request, std::uint64_t seed)
    : id_(std::move(id)),
      space_(parse_space(request)),
      optimizer_(parse_config(request, space_), seed),
      validation_rng_(derive_seed(seed, 0, kValidationTag)) {
    current_ = optimizer_.propose_next().coords;
    log_.push_back({trial_, phase_, current_, {}, std::nullopt});
}

json Session::action_json(const Eigen::VectorXd & normalized) const {
    const Eigen::VectorXd physical = space_.denormalize(normalized);
    json out{{"action", vector_json(physical)}};
    if (!space_.names.empty()) {
        json named = json::object();
        for (int i = 0; i < space_.dims(); ++i) named[space_.names[i]] = physical[i];
        out["parameters"] = named;
    }
    return out;
}

json Session::trial_payload() const {
    json t = action_json(current_);
    t["index"] = trial_;
    return t;
}

std::optional<Eigen::VectorXd> Session::coactive_target(const json & c) const {
    if (!c.is_object()) throw InvalidArgument("coactive must be an object {dim, direction, magnitude}");
    if (!c.contains("dim") || !c["dim"].is_number_integer()) throw InvalidArgument("coactive.dim must be an integer");
    if (!c.contains("direction") || !c["direction"].is_number()) throw InvalidArgument("coactive.direction must be +1 or -1");
    if (!c.contains("magnitude") || !c["magnitude"].is_number()) throw InvalidArgument("coactive.magnitude must be a number");
    const int dim = c["dim"].get<int>();
    const double direction = c["direction"].get<double>();
    const double magnitude = c["magnitude"].get<double>();
    if (dim < 0 || dim >= space_.dims()) throw InvalidArgument("coactive.dim out of range");
    if (direction != 1.0 && direction != -1.0) throw InvalidArgument("coactive.direction must be +1 or -1");
    if (!std::isfinite(magnitude) || magnitude <= 0.0) throw InvalidArgument("coactive.magnitude must be positive");

    // Physical magnitude -> whole line steps of 1/(m-1), at least one.
    const double delta = 1.0 / (space_.granularity - 1);
    const double normalized = magnitude / (space_.upper[dim] - space_.lower[dim]);
    const double steps = std::max(1.0, std::round(normalized / delta));
    Eigen::VectorXd target = current_;
    target[dim] = std::clamp(current_[dim] + direction * steps * delta, 0.0, 1.0);
    if (std::abs(target[dim] - current_[dim]) <= kPointTolerance) return std::nullopt;
    return target;
}

void Session::begin_validation() {
    a_max_ = optimizer_.posterior_max();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Eigen::VectorXd> random(kScoredComparisons);
    for (auto & r : random) {
        r.resize(space_.dims());
        for (int i = 0; i < space_.dims(); ++i) r[i] = unif(validation_rng_);
    }
    validation_plan_ = {random[0], a_max_->coords, random[1], random[2], a_max_->coords, random[3]};
    phase_ = Phase::Validation;
}

json Session::submit(const json & body) {
    if (phase_ == Phase::Done) throw ApiError(410, "session is complete");
    if (!body.is_object()) throw InvalidArgument("feedback body must be a JSON object");
    if (body.contains("trial")) {
        if (!body["trial"].is_number_integer() || body["trial"].get<int>() != trial_)
            throw StaleFeedback("feedback does not refer to the pending trial " + std::to_string(trial_));
    }
    if (!body.contains("preference") || !body["preference"].is_string())
        throw InvalidArgument("preference must be \"first\", \"second\" or \"none\"");
    const std::string answer = body["preference"].get<std::string>();
    if (answer != "first" && answer != "second" && answer != "none")
        throw InvalidArgument("preference must be \"first\", \"second\" or \"none\"");
    std::optional<Eigen::VectorXd> coactive;
    const bool has_coactive = body.contains("coactive") && !body["coactive"].is_null();
    if (has_coactive) coactive = coactive_target(body["coactive"]);

    TrialEntry & entry = log_.back();
    entry.preference = answer;
    if (has_coactive) entry.coactive = body["coactive"];

    if (phase_ == Phase::Learning) {
        FeedbackBundle fb;
        fb.preference = trial_ == 1 ? Preference::NoPreference : to_preference(answer);
        fb.preference_source = FeedbackSource::HumanPreference;
        fb.coactive = coactive;
        optimizer_.absorb_feedback(*optimizer_.pending(), fb);
        if (trial_ < kLearningTrials) {
            current_ = optimizer_.propose_next().coords;
        } else {
            begin_validation();
            current_ = validation_plan_.front();
        }
    } else {
        const int v = trial_ - kLearningTrials - 1;
        if (scored(v)) {
            const bool preferred = a_max_is_current(v) ? answer == "second" : answer == "first";
            outcomes_.push_back(preferred);
        }
        if (v + 1 == kValidationTrials) {
            phase_ = Phase::Done;
            const auto correct = std::count(outcomes_.begin(), outcomes_.end(), true);
            json summary = action_json(a_max_->coords);
            summary["validation_correct"] = correct;
            summary["validation_scored"] = outcomes_.size();
            summary["validation_accuracy_pct"] = 100.0 * static_cast<double>(correct) / kScoredComparisons;
            return json{{"summary", summary}};
        }
        current_ = validation_plan_[static_cast<std::size_t>(v + 1)];
    }
    ++trial_;
    log_.push_back({trial_, phase_, current_, {}, std::nullopt});
    return json{{"trial", trial_payload()}};
}

json Session::report() const {
    json r;
    r["id"] = id_;
    r["phase"] = to_string(phase_);
    int completed = 0;
    json trials = json::array();
    for (const auto & e : log_) {
        if (e.preference.empty()) continue;
        ++completed;
        json t = action_json(e.action);
        t["index"] = e.index;
        t["phase"] = to_string(e.phase);
        t["preference"] = e.preference;
        t["coactive"] = e.coactive ? *e.coactive : json(nullptr);
        trials.push_back(t);
    }
    r["trials_completed"] = completed;
    r["trials"] = trials;
    r["a_max"] = a_max_ ? action_json(a_max_->coords) : json(nullptr);

    const auto correct = std::count(outcomes_.begin(), outcomes_.end(), true);
    r["validation"] = {{"scored", outcomes_.size()},
                       {"correct", correct},
                       {"total", kScoredComparisons},
                       {"accuracy_pct", phase_ == Phase::Done ? json(100.0 * static_cast<double>(correct) / kScoredComparisons)
                                                              : json(nullptr)}};

    // Visitation of the learning trials against the posterior mean.
    std::vector<Eigen::VectorXd> visited;
    for (const auto & e : log_)
        if (e.phase == Phase::Learning && !e.preference.empty()) visited.push_back(e.action);
    json corr{{"bins", kCorrelationBins}, {"per_dim", json::array()}, {"pooled", nullptr}};
    if (!optimizer_.dataset().empty()) {
        const UtilityPosterior post = optimizer_.evidence_posterior();
        std::vector<Eigen::VectorXd> points;
        for (const auto & p : post.points) points.push_back(p.coords);
        const VisitationCorrelation vc = visitation_correlation(visited, points, post.mean, kCorrelationBins);
        for (std::size_t d = 0; d < vc.per_dim.size(); ++d) corr["per_dim"].push_back(correlation_json(vc.per_dim[d]));
        corr["pooled"] = correlation_json(vc.pooled);
    }
    r["correlation"] = corr;
    return r;
}

json Session::state() const {
    json s;
    s["id"] = id_;
    s["phase"] = to_string(phase_);
    s["trial"] = trial_;
    s["current"] = vector_json(current_);
    s["space"] = {{"lower", vector_json(space_.lower)},
                  {"upper", vector_json(space_.upper)},
                  {"granularity", space_.granularity},
                  {"names", space_.names},
                  {"units", space_.units}};
    const GpConfig & gp = optimizer_.config().gp;
    s["gp"] = {{"lengthscale", gp.lengthscale},
               {"signal_variance", gp.signal_variance},
               {"noise_variance", gp.noise_variance},
               {"preference_noise", gp.preference_noise}};

    auto action = [](const Action & a) { return json{{"id", a.id}, {"coords", vector_json(a.coords)}}; };
    json opt;
    opt["iteration"] = optimizer_.iteration();
    opt["incumbent"] = action(optimizer_.incumbent());
    opt["last_action"] = optimizer_.last_action() ? action(*optimizer_.last_action()) : json(nullptr);
    opt["pending"] = optimizer_.pending() ? action(*optimizer_.pending()) : json(nullptr);
    opt["rng"] = rng_state(optimizer_.rng());
    json records = json::array();
    for (const auto & rec : optimizer_.dataset().records())
        records.push_back({rec.winner_id, rec.loser_id, static_cast<int>(rec.source)});
    json actions = json::array();
    for (const auto & a : optimizer_.dataset().actions()) actions.push_back(action(a));
    opt["records"] = records;
    opt["actions"] = actions;
    s["optimizer"] = opt;

    s["validation_rng"] = rng_state(validation_rng_);
    s["a_max"] = a_max_ ? action(*a_max_) : json(nullptr);
    json plan = json::array();
    for (const auto & p : validation_plan_) plan.push_back(vector_json(p));
    s["validation_plan"] = plan;
    s["outcomes"] = outcomes_;
    json log = json::array();
    for (const auto & e : log_) {
        log.push_back({{"index", e.index},
                       {"phase", to_string(e.phase)},
                       {"action", vector_json(e.action)},
                       {"preference", e.preference},
                       {"coactive", e.coactive ? *e.coactive : json(nullptr)}});
    }
    s["log"] = log;
    return s;
}

namespace {

ApiResponse error_response(int status, const std::string & message) {
    return {status, json{{"error", message}}.dump()};
}

// Runs `fn`, mapping library failures onto HTTP statuses.
template <class Fn>
ApiResponse guarded(Fn && fn) {
    try {
        return fn();
    } catch (const ApiError & e) {
        return error_response(e.status(), e.what());
    } catch (const json::exception & e) {
        return error_response(400, e.what());
    } catch (const StaleFeedback & e) {
        return error_response(409, e.what());
    } catch (const InvalidArgument & e) {
        return error_response(400, e.what());
    } catch (const DimensionMismatch & e) {
        return error_response(400, e.what());
    } catch (const Error & e) {
        return error_response(500, e.what());
    }
}

struct ReplayedSession {
    std::unique_ptr<Session> session;
    std::size_t events = 0;
};

ReplayedSession replay(const std::filesystem::path & log_file) {
    std::ifstream in(log_file);
    if (!in) throw InvalidArgument("cannot open " + log_file.string());
    ReplayedSession out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json event = json::parse(line);
        const std::string type = event.at("type").get<std::string>();
        if (type == "create") {
            if (out.session) throw InvalidArgument(log_file.string() + ": second create event");
            out.session = std::make_unique<Session>(event.at("id").get<std::string>(), event.at("request"),
                                                    event.at("seed").get<std::uint64_t>());
        } else if (type == "feedback") {
            if (!out.session) throw InvalidArgument(log_file.string() + ": feedback before create");
            out.session->submit(event.at("body"));
        } else {
            throw InvalidArgument(log_file.string() + ": unknown event type " + type);
        }
        ++out.events;
    }
    if (!out.session) throw InvalidArgument(log_file.string() + ": no create event");
    return out;
}

}  // namespace

std::string replay_state(const std::filesystem::path & log_file) { return replay(log_file).session->state().dump(); }

SessionManager::SessionManager(std::optional<std::filesystem::path> log_dir) : log_dir_(std::move(log_dir)) {
    if (log_dir_) std::filesystem::create_directories(*log_dir_);
}

std::string SessionManager::new_id() {
    std::lock_guard lock(id_mutex_);
    for (;;) {
        std::uniform_int_distribution<std::uint64_t> dist;
        std::mt19937_64 rng((static_cast<std::uint64_t>(entropy_()) << 32) ^ entropy_());
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(dist(rng)));
        std::shared_lock reg(registry_mutex_);
        if (!sessions_.count(buf)) return buf;
    }
}

void SessionManager::publish(Entry & entry) {
    auto snap = std::make_shared<const Snapshot>(Snapshot{entry.session->state().dump(), entry.session->report().dump()});
    std::atomic_store(&entry.snapshot, std::shared_ptr<const Snapshot>(std::move(snap)));
}

void SessionManager::append_log(const std::string & id, const json & event) const {
    if (!log_dir_) return;
    std::ofstream out(*log_dir_ / (id + ".jsonl"), std::ios::app);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to the event log of session " + id);
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string & id) const {
    std::shared_lock lock(registry_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown session " + id);
    return it->second;
}

std::shared_ptr<const SessionManager::Snapshot> SessionManager::snapshot_of(const std::string & id) const {
    return std::atomic_load(&find(id)->snapshot);
}

ApiResponse SessionManager::create(const std::string & body) {
    return guarded([&] {
        const json request = json::parse(body);
        std::uint64_t seed = 0;
        if (request.is_object() && request.contains("seed")) {
            if (!request["seed"].is_number_unsigned()) throw InvalidArgument("seed must be a non-negative integer");
            seed = request["seed"].get<std::uint64_t>();
        } else {
            std::lock_guard lock(id_mutex_);
            seed = (static_cast<std::uint64_t>(entropy_()) << 32) ^ entropy_();
        }
        const std::string id = new_id();
        auto entry = std::make_shared<Entry>();
        entry->session = std::make_unique<Session>(id, request, seed);
        append_log(id, json{{"type", "create"}, {"id", id}, {"seed", seed}, {"request", request}});
        publish(*entry);
        const json response{{"id", id}, {"trial", entry->session->trial_payload()}};
        {
            std::unique_lock lock(registry_mutex_);
            sessions_.emplace(id, std::move(entry));
        }
        return ApiResponse{201, response.dump()};
    });
}

ApiResponse SessionManager::feedback(const std::string & id, const std::string & body) {
    return guarded([&] {
        const auto entry = find(id);
        std::unique_lock writer(entry->writer, std::try_to_lock);
        if (!writer.owns_lock()) throw ApiError(409, "another submission for this session is in flight");
        const json request = json::parse(body);
        const json response = entry->session->submit(request);
        append_log(id, json{{"type", "feedback"}, {"body", request}});
        publish(*entry);
        return ApiResponse{200, response.dump()};
    });
}

ApiResponse SessionManager::report(const std::string & id) const {
    return guarded([&] { return ApiResponse{200, snapshot_of(id)->report}; });
}

ApiResponse SessionManager::state(const std::string & id) const {
    return guarded([&] { return ApiResponse{200, snapshot_of(id)->state}; });
}

std::size_t SessionManager::load_logs() {
    if (!log_dir_) return 0;
    std::size_t loaded = 0;
    for (const auto & file : std::filesystem::directory_iterator(*log_dir_)) {
        if (file.path().extension() != ".jsonl") continue;
        auto entry = std::make_shared<Entry>();
        entry->session = replay(file.path()).session;
        publish(*entry);
        std::unique_lock lock(registry_mutex_);
        sessions_[entry->session->id()] = std::move(entry);
        ++loaded;
    }
    return loaded;
}

std::size_t SessionManager::size() const {
    std::shared_lock lock(registry_mutex_);
    return sessions_.size();
}

void install_routes(httplib::Server & server, SessionManager & manager) {
    auto send = [](httplib::Response & res, const ApiResponse & api) {
        res.status = api.status;
        res.set_content(api.body, "application/json");
    };
    server.Post("/sessions", [&manager, send](const httplib::Request & req, httplib::Response & res) {
        send(res, manager.create(req.body));
    });
    server.Post(R"(/sessions/([^/]+)/feedback)", [&manager, send](const httplib::Request & req, httplib::Response & res) {
        send(res, manager.feedback(req.matches[1], req.body));
    });
    server.Get(R"(/sessions/([^/]+)/report)", [&manager, send](const httplib::Request & req, httplib::Response & res) {
        send(res, manager.report(req.matches[1]));
    });
    server.Get(R"(/sessions/([^/]+)/state)", [&manager, send](const httplib::Request & req, httplib::Response & res) {
        send(res, manager.state(req.matches[1]));
    });
    server.Get("/healthz", [send](const httplib::Request &, httplib::Response & res) {
        send(res, ApiResponse{200, json{{"status", "ok"}}.dump()});
    });
}

}  // namespace linecospar
