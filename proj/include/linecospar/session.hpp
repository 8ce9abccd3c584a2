#pragma once

#include "linecospar/action.hpp"
#include "linecospar/optimizer.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace httplib {
class Server;
}

namespace linecospar {

using json = nlohmann::json;

inline constexpr int kLearningTrials = 30;
inline constexpr int kValidationTrials = 6;
inline constexpr int kScoredComparisons = 4;

enum class Phase { Learning, Validation, Done };
std::string to_string(Phase phase);

// Failure with the HTTP status it maps to.
class ApiError : public std::runtime_error {
  public:
    ApiError(int status, const std::string & what) : std::runtime_error(what), status_(status) {}
    int status() const { return status_; }

  private:
    int status_;
};

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON document
};

struct TrialEntry {
    int index = 0;
    Phase phase = Phase::Learning;
    Eigen::VectorXd action;  // normalized
    std::string preference;  // feedback given on this trial, empty until then
    std::optional<json> coactive;
};

// One live optimization session. Not thread-safe by itself; SessionManager
// serializes the writers.
class Session {
  public:
    // `request` is the body of POST /sessions; `id` and `seed` are already resolved.
    Session(std::string id, const json & request, std::uint64_t seed);

    // Applies a feedback body and returns the response payload.
    json submit(const json & body);

    const std::string & id() const { return id_; }
    Phase phase() const { return phase_; }
    int trial() const { return trial_; }
    const ActionSpace & space() const { return space_; }
    const Optimizer & optimizer() const { return optimizer_; }

    json trial_payload() const;
    json report() const;
    // Everything that determines future behaviour, serialized deterministically.
    json state() const;

  private:
    json action_json(const Eigen::VectorXd & normalized) const;
    std::optional<Eigen::VectorXd> coactive_target(const json & coactive) const;
    void begin_validation();

    std::string id_;
    ActionSpace space_;
    Optimizer optimizer_;
    std::mt19937_64 validation_rng_;
    Phase phase_ = Phase::Learning;
    int trial_ = 1;  // index of the trial awaiting feedback
    Eigen::VectorXd current_;
    std::vector<TrialEntry> log_;
    std::optional<Action> a_max_;
    std::vector<Eigen::VectorXd> validation_plan_;
    std::vector<bool> outcomes_;
};

// Registry of sessions with per-session single-writer locking and snapshot
// reads. With a log directory every accepted request is appended to
// <dir>/<id>.jsonl and sessions can be rebuilt by replay.
class SessionManager {
  public:
    explicit SessionManager(std::optional<std::filesystem::path> log_dir = std::nullopt);

    ApiResponse create(const std::string & body);
    ApiResponse feedback(const std::string & id, const std::string & body);
    ApiResponse report(const std::string & id) const;
    ApiResponse state(const std::string & id) const;

    // Replays every *.jsonl file of the log directory. Returns the count.
    std::size_t load_logs();

    std::size_t size() const;

  private:
    struct Snapshot {
        std::string state;
        std::string report;
    };
    struct Entry {
        std::unique_ptr<Session> session;
        std::mutex writer;
        std::shared_ptr<const Snapshot> snapshot;  // swapped atomically
    };

    std::shared_ptr<Entry> find(const std::string & id) const;
    std::shared_ptr<const Snapshot> snapshot_of(const std::string & id) const;
    static void publish(Entry & entry);
    void append_log(const std::string & id, const json & event) const;
    std::string new_id();

    std::optional<std::filesystem::path> log_dir_;
    mutable std::shared_mutex registry_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
    std::mutex id_mutex_;
    std::random_device entropy_;
};

// Rebuilds a session from its event log and returns its state document.
std::string replay_state(const std::filesystem::path & log_file);

void install_routes(httplib::Server & server, SessionManager & manager);

}  // namespace linecospar
