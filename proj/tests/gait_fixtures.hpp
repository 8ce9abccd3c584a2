// Synthetic gaits and preference pairs for the cost-fitting tests.
#pragma once

#include "linecospar/gaitfit.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

inline linecospar::GaitTrajectory random_gait(std::mt19937_64 & rng, const std::string & id) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    linecospar::LipmConfig cfg;
    cfg.z0 = 0.8 + 0.3 * u(rng);
    cfg.duration = 0.6;
    cfg.dt = 0.01;
    cfg.com0 = {0.02 * u(rng), 0.02 * u(rng) - 0.01};
    cfg.vcom0 = {0.1 * u(rng), 0.05 * u(rng) - 0.025};
    cfg.cop = {{0.0, 0.01 * u(rng), 0.0}, {0.3, 0.01 * u(rng) + 0.02, 0.01 * u(rng)}};
    cfg.com_goal = {0.03, 0.0};
    cfg.foot_start = {-0.1 - 0.1 * u(rng), 0.1};
    cfg.foot_goal = {0.1 + 0.1 * u(rng), 0.1 + 0.05 * u(rng)};
    return linecospar::simulate_lipm(cfg, id);
}

// Pairs labelled by a subject whose true cost is w_true · terms.
inline std::vector<linecospar::PreferencePair> synthetic_subject(const std::string & subject, int pairs,
                                                                 const Eigen::Vector4d & w_true, std::mt19937_64 & rng) {
    std::vector<linecospar::PreferencePair> out;
    while (static_cast<int>(out.size()) < pairs) {
        const auto a = random_gait(rng, subject + "_a" + std::to_string(out.size()));
        const auto b = random_gait(rng, subject + "_b" + std::to_string(out.size()));
        const auto fa = linecospar::extract_features(a);
        const auto fb = linecospar::extract_features(b);
        double ca = 0.0, cb = 0.0;
        for (int i = 0; i < 4; ++i) {
            ca += w_true[i] * fa[i];
            cb += w_true[i] * fb[i];
        }
        if (ca == cb) continue;
        linecospar::PreferencePair p;
        p.subject_id = subject;
        const bool a_wins = ca < cb;
        p.preferred_id = a_wins ? a.gait_id : b.gait_id;
        p.other_id = a_wins ? b.gait_id : a.gait_id;
        p.preferred = a_wins ? fa : fb;
        p.other = a_wins ? fb : fa;
        p.preferred_static = linecospar::static_cost(a_wins ? a : b);
        p.other_static = linecospar::static_cost(a_wins ? b : a);
        out.push_back(p);
    }
    return out;
}

}  // namespace fixtures
