// Scripted client for the session service: answers every comparison with a
// noiseless utility over physical coordinates.
#pragma once

#include "linecospar/session.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixtures {

using Utility = std::function<double(const std::vector<double> &)>;

struct DriveResult {
    std::string id;
    linecospar::json summary;
    int trials = 0;
};

inline std::string answer(const Utility & u, const std::vector<double> & current, const std::vector<double> * previous) {
    if (!previous) return "none";
    const double now = u(current), before = u(*previous);
    if (now > before) return "second";
    if (now < before) return "first";
    return "none";
}

inline DriveResult drive(linecospar::SessionManager & manager, const linecospar::json & create, const Utility & u) {
    using linecospar::json;
    const auto created = manager.create(create.dump());
    if (created.status != 201) throw std::runtime_error("create failed: " + created.body);
    json doc = json::parse(created.body);
    DriveResult out;
    out.id = doc["id"].get<std::string>();
    json trial = doc["trial"];
    std::optional<std::vector<double>> previous;
    for (;;) {
        const auto current = trial["action"].get<std::vector<double>>();
        const json body{{"trial", trial["index"]}, {"preference", answer(u, current, previous ? &*previous : nullptr)}};
        const auto r = manager.feedback(out.id, body.dump());
        if (r.status != 200) throw std::runtime_error("feedback failed: " + r.body);
        ++out.trials;
        const json next = json::parse(r.body);
        if (next.contains("summary")) {
            out.summary = next["summary"];
            return out;
        }
        previous = current;
        trial = next["trial"];
    }
}

}  // namespace fixtures
