#include "linecospar/gaitfit.hpp"

#include "linecospar/csv.hpp"
#include "linecospar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <ostream>

namespace linecospar {

namespace {

constexpr const char * kColumns[] = {"t", "x_com", "y_com", "x_cop", "y_cop", "xg_com", "yg_com",
                                     "px", "py", "pxg", "pyg"};
constexpr const char * kVelocityColumns[] = {"vx_com", "vy_com", "vx_cop", "vy_cop"};

constexpr int kMaxSweeps = 200000;
constexpr double kStepTol = 1e-13;
constexpr int kMaxNewton = 200;
constexpr int kRoundingStages = 5;  // widths ε, ε/10, ..., ε/10⁴

double sq(double x) { return x * x; }

double sample_period(const Eigen::VectorXd & t) { return (t[t.size() - 1] - t[0]) / static_cast<double>(t.size() - 1); }

// Hildreth coordinate ascent on the dual of min ‖w‖² s.t. δ_k·w ≤ −ε, with
// w = −Σ μ_k δ_k and μ_k ≥ 0. Returns false if the sweeps ran out before the
// iterates settled, which is how infeasible sets show up.
bool dual_ascent(const std::vector<Eigen::Vector4d> & rows, Eigen::Vector4d & w) {
    std::vector<double> mu(rows.size(), 0.0);
    w.setZero();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double largest = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const double norm2 = rows[k].squaredNorm();
            const double next = std::max(0.0, mu[k] + (rows[k].dot(w) + kMarginEps) / norm2);
            const double change = next - mu[k];
            if (change != 0.0) {
                w -= change * rows[k];
                mu[k] = next;
                largest = std::max(largest, std::abs(change) * std::sqrt(norm2));
            }
        }
        if (largest <= kStepTol * std::max(w.norm(), kMarginEps)) return true;
    }
    return false;
}

// Hinge with its corner rounded over [0, tau].
double huber_hinge(double m, double tau) {
    if (m <= 0.0) return 0.0;
    if (m >= tau) return m - 0.5 * tau;
    return 0.5 * m * m / tau;
}

// min Σ max(0, δ_k·w + ε) + λ‖w‖². Dual coordinate ascent stalls when rows
// oppose each other, so this runs damped Newton on the rounded hinge and
// shrinks the rounding width, warm-starting each stage.
Eigen::Vector4d soft_margin(const std::vector<Eigen::Vector4d> & rows) {
    Eigen::Vector4d w = Eigen::Vector4d::Zero();
    for (int stage = 0; stage < kRoundingStages; ++stage) {
        const double tau = kMarginEps * std::pow(0.1, stage);
        auto objective = [&](const Eigen::Vector4d & v) {
            double s = kSoftMarginLambda * v.squaredNorm();
            for (const auto & r : rows) s += huber_hinge(r.dot(v) + kMarginEps, tau);
            return s;
        };
        for (int it = 0; it < kMaxNewton; ++it) {
            Eigen::Vector4d grad = 2.0 * kSoftMarginLambda * w;
            Eigen::Matrix4d hess = 2.0 * kSoftMarginLambda * Eigen::Matrix4d::Identity();
            for (const auto & r : rows) {
                const double m = r.dot(w) + kMarginEps;
                if (m >= tau) {
                    grad += r;
                } else if (m > 0.0) {
                    grad += (m / tau) * r;
                    hess += (1.0 / tau) * r * r.transpose();
                }
            }
            const Eigen::Vector4d step = -hess.ldlt().solve(grad);
            if (!step.allFinite() || step.norm() <= 1e-15 * std::max(w.norm(), kMarginEps)) break;
            const double f0 = objective(w);
            double t = 1.0;
            while (t > 1e-20 && objective(w + t * step) > f0 + 1e-4 * t * grad.dot(step)) t *= 0.5;
            if (t <= 1e-20) break;
            w += t * step;
        }
    }
    return w;
}

Eigen::Vector4d to_vector(const GaitTerms & terms) { return Eigen::Vector4d(terms[0], terms[1], terms[2], terms[3]); }

double cost(const GaitTerms & terms, double static_value, CostKind kind, const Eigen::Vector4d & w) {
    switch (kind) {
    case CostKind::Lipm: return w.dot(to_vector(terms));
    case CostKind::Static: return static_value;
    case CostKind::Dynamic: return terms[3];
    }
    return 0.0;
}

}  // namespace

void GaitTrajectory::validate() const {
    const Eigen::Index n = t.size();
    if (n < 2) throw MalformedTrajectory(gait_id + ": a trajectory needs at least two samples");
    for (const Eigen::VectorXd * s : {&x_com, &y_com, &x_cop, &y_cop, &xg_com, &yg_com, &px, &py, &pxg, &pyg, &vx_com,
                                      &vy_com, &vx_cop, &vy_cop}) {
        if (s->size() != n) throw MalformedTrajectory(gait_id + ": series lengths differ");
        if (!s->allFinite()) throw MalformedTrajectory(gait_id + ": non-finite sample");
    }
    const double dt = sample_period(t);
    if (!(dt > 0.0)) throw MalformedTrajectory(gait_id + ": time stamps must increase");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt)
            throw MalformedTrajectory(gait_id + ": samples are not uniformly spaced");
    }
}

Eigen::VectorXd differentiate(const Eigen::VectorXd & v, double dt) {
    const Eigen::Index n = v.size();
    if (n < 2) throw MalformedTrajectory("need at least two samples to differentiate");
    Eigen::VectorXd d(n);
    d[0] = (v[1] - v[0]) / dt;
    d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
    for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
    return d;
}

GaitTrajectory read_trajectory_csv(const std::filesystem::path & path, const std::string & gait_id) {
    const CsvTable table = read_csv(path);
    const std::size_t base = std::size(kColumns);
    bool velocities = false;
    if (table.header.size() == base + std::size(kVelocityColumns)) {
        velocities = true;
    } else if (table.header.size() != base) {
        throw MalformedTrajectory(path.string() + ": expected 11 or 15 columns");
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        const char * want = i < base ? kColumns[i] : kVelocityColumns[i - base];
        if (table.header[i] != want)
            throw MalformedTrajectory(path.string() + ": column " + std::to_string(i + 1) + " must be " + want);
    }

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    std::vector<Eigen::VectorXd> cols(table.header.size(), Eigen::VectorXd(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto & row = table.rows[static_cast<std::size_t>(r)];
        if (row.size() != table.header.size())
            throw MalformedTrajectory(path.string() + ": row " + std::to_string(r + 2) + " has the wrong length");
        for (std::size_t c = 0; c < row.size(); ++c) cols[c][r] = parse_double(row[c]);
    }

    GaitTrajectory traj;
    traj.gait_id = gait_id;
    traj.t = cols[0];
    traj.x_com = cols[1];
    traj.y_com = cols[2];
    traj.x_cop = cols[3];
    traj.y_cop = cols[4];
    traj.xg_com = cols[5];
    traj.yg_com = cols[6];
    traj.px = cols[7];
    traj.py = cols[8];
    traj.pxg = cols[9];
    traj.pyg = cols[10];
    if (n < 2) throw MalformedTrajectory(path.string() + ": a trajectory needs at least two samples");
    if (velocities) {
        traj.vx_com = cols[11];
        traj.vy_com = cols[12];
        traj.vx_cop = cols[13];
        traj.vy_cop = cols[14];
    } else {
        const double dt = sample_period(traj.t);
        traj.vx_com = differentiate(traj.x_com, dt);
        traj.vy_com = differentiate(traj.y_com, dt);
        traj.vx_cop = differentiate(traj.x_cop, dt);
        traj.vy_cop = differentiate(traj.y_cop, dt);
    }
    traj.validate();
    return traj;
}

void write_trajectory_csv(std::ostream & out, const GaitTrajectory & traj) {
    traj.validate();
    for (const char * c : kColumns) out << c << ',';
    for (std::size_t i = 0; i < std::size(kVelocityColumns); ++i)
        out << kVelocityColumns[i] << (i + 1 < std::size(kVelocityColumns) ? "," : "\n");
    for (Eigen::Index i = 0; i < traj.size(); ++i) {
        const double row[] = {traj.t[i],     traj.x_com[i],  traj.y_com[i],  traj.x_cop[i], traj.y_cop[i],
                              traj.xg_com[i], traj.yg_com[i], traj.px[i],     traj.py[i],    traj.pxg[i],
                              traj.pyg[i],   traj.vx_com[i], traj.vy_com[i], traj.vx_cop[i], traj.vy_cop[i]};
        for (std::size_t c = 0; c < std::size(row); ++c) out << format_double(row[c]) << (c + 1 < std::size(row) ? "," : "\n");
    }
}

GaitTerms extract_features(const GaitTrajectory & traj) {
    traj.validate();
    GaitTerms terms{};
    const Eigen::Index n = traj.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        terms[0] += sq(traj.xg_com[i] - traj.x_com[i]) + sq(traj.yg_com[i] - traj.y_com[i]);
        terms[1] += sq(traj.vx_com[i]) + sq(traj.vy_com[i]);
        terms[2] += sq(traj.vx_cop[i]) + sq(traj.vy_cop[i]);
        terms[3] += sq(traj.pxg[i] - traj.px[i]) + sq(traj.pyg[i] - traj.py[i]);
    }
    for (double & v : terms) v /= static_cast<double>(n);
    return terms;
}

double static_cost(const GaitTrajectory & traj) {
    traj.validate();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < traj.size(); ++i)
        sum += sq(traj.x_com[i] - traj.x_cop[i]) + sq(traj.y_com[i] - traj.y_cop[i]);
    return sum / static_cast<double>(traj.size());
}

void LipmConfig::validate() const {
    if (!(z0 > 0.0) || !std::isfinite(z0)) throw InvalidArgument("z0 must be positive");
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("g must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (!(duration >= dt) || !std::isfinite(duration)) throw InvalidArgument("duration must be at least dt");
    for (std::size_t i = 1; i < cop.size(); ++i)
        if (cop[i].t_begin < cop[i - 1].t_begin) throw InvalidArgument("CoP steps must be ordered in time");
}

GaitTrajectory simulate_lipm(const LipmConfig & cfg, const std::string & gait_id) {
    cfg.validate();
    const auto steps = static_cast<Eigen::Index>(std::llround(cfg.duration / cfg.dt));
    const Eigen::Index n = steps + 1;
    const double omega2 = cfg.g / cfg.z0;

    auto cop_at = [&](double t) {
        Eigen::Vector2d p = Eigen::Vector2d::Zero();
        for (const auto & s : cfg.cop) {
            if (s.t_begin <= t + 1e-12) p = {s.x, s.y};
            else break;
        }
        return p;
    };

    GaitTrajectory traj;
    traj.gait_id = gait_id;
    for (Eigen::VectorXd * s : {&traj.t, &traj.x_com, &traj.y_com, &traj.x_cop, &traj.y_cop, &traj.xg_com,
                                &traj.yg_com, &traj.px, &traj.py, &traj.pxg, &traj.pyg, &traj.vx_com, &traj.vy_com})
        s->resize(n);

    // State (x, y, ẋ, ẏ). The CoP is held at its value at the start of each step.
    Eigen::Vector4d s(cfg.com0.x(), cfg.com0.y(), cfg.vcom0.x(), cfg.vcom0.y());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        const Eigen::Vector2d p = cop_at(t);
        traj.t[i] = t;
        traj.x_com[i] = s[0];
        traj.y_com[i] = s[1];
        traj.vx_com[i] = s[2];
        traj.vy_com[i] = s[3];
        traj.x_cop[i] = p.x();
        traj.y_cop[i] = p.y();
        traj.xg_com[i] = cfg.com_goal.x();
        traj.yg_com[i] = cfg.com_goal.y();
        const double phase = 0.5 * (1.0 - std::cos(M_PI * t / cfg.duration));
        traj.px[i] = cfg.foot_start.x() + phase * (cfg.foot_goal.x() - cfg.foot_start.x());
        traj.py[i] = cfg.foot_start.y() + phase * (cfg.foot_goal.y() - cfg.foot_start.y());
        traj.pxg[i] = cfg.foot_goal.x();
        traj.pyg[i] = cfg.foot_goal.y();
        if (i == steps) break;

        auto rhs = [&](const Eigen::Vector4d & q) {
            return Eigen::Vector4d(q[2], q[3], omega2 * (q[0] - p.x()), omega2 * (q[1] - p.y()));
        };
        const double h = cfg.dt;
        const Eigen::Vector4d k1 = rhs(s);
        const Eigen::Vector4d k2 = rhs(s + 0.5 * h * k1);
        const Eigen::Vector4d k3 = rhs(s + 0.5 * h * k2);
        const Eigen::Vector4d k4 = rhs(s + h * k3);
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    traj.vx_cop = differentiate(traj.x_cop, cfg.dt);
    traj.vy_cop = differentiate(traj.y_cop, cfg.dt);
    return traj;
}

CostWeights fit_weights(const std::vector<GaitTerms> & deltas) {
    CostWeights out;
    std::vector<Eigen::Vector4d> rows;
    for (const auto & d : deltas) {
        const Eigen::Vector4d v = to_vector(d);
        if (!v.allFinite()) throw InvalidArgument("non-finite feature difference");
        if (v.isZero(0.0)) {
            ++out.dropped;
            continue;
        }
        rows.push_back(v);
    }
    if (out.dropped > 0)
        std::cerr << "warning: dropped " << out.dropped << " preference pair(s) with identical features\n";
    if (rows.empty()) throw DegenerateFeatures("every preference pair has an all-zero feature difference");

    const bool settled = dual_ascent(rows, out.w);
    bool feasible = settled;
    for (const auto & r : rows) feasible = feasible && r.dot(out.w) <= -0.5 * kMarginEps;
    if (feasible) return out;

    out.feasible = false;
    out.w = soft_margin(rows);
    return out;
}

GaitTerms PreferencePair::delta() const {
    GaitTerms d{};
    for (int i = 0; i < 4; ++i) d[i] = preferred[i] - other[i];
    return d;
}

std::string to_string(CostKind kind) {
    switch (kind) {
    case CostKind::Lipm: return "lipm";
    case CostKind::Static: return "static";
    case CostKind::Dynamic: return "dynamic";
    }
    return "?";
}

double rank_consistency(const std::vector<PreferencePair> & pairs, CostKind kind, const Eigen::Vector4d & w) {
    if (pairs.empty()) return std::nan("");
    int correct = 0;
    for (const auto & p : pairs) {
        if (cost(p.preferred, p.preferred_static, kind, w) < cost(p.other, p.other_static, kind, w)) ++correct;
    }
    return 100.0 * correct / static_cast<double>(pairs.size());
}

std::vector<SubjectScore> predictive_power(const std::vector<PreferencePair> & pairs, CostKind kind, bool holdout) {
    std::map<std::string, std::vector<PreferencePair>> by_subject;
    for (const auto & p : pairs) by_subject[p.subject_id].push_back(p);

    std::vector<SubjectScore> scores;
    for (const auto & [subject, own] : by_subject) {
        SubjectScore s;
        s.kind = kind;
        s.subject_id = subject;
        s.pairs = static_cast<int>(own.size());
        if (kind == CostKind::Dynamic) s.w = Eigen::Vector4d(0.0, 0.0, 0.0, 1.0);
        if (kind == CostKind::Lipm) {
            std::vector<GaitTerms> train;
            for (const auto & p : holdout ? pairs : own)
                if (!holdout || p.subject_id != subject) train.push_back(p.delta());
            if (train.empty()) {
                s.accuracy_pct = std::nan("");
                scores.push_back(s);
                continue;
            }
            try {
                const CostWeights fit = fit_weights(train);
                s.w = fit.w;
                s.feasible = fit.feasible;
            } catch (const DegenerateFeatures &) {
                s.w.setZero();
                s.feasible = false;
            }
        }
        s.accuracy_pct = rank_consistency(own, kind, s.w);
        scores.push_back(s);
    }
    return scores;
}

std::vector<PreferencePair> load_preferences(const std::filesystem::path & prefs_csv,
                                             const std::filesystem::path & traj_dir) {
    const CsvTable table = read_csv(prefs_csv);
    const int subject = table.column("subject_id");
    const int preferred = table.column("preferred_gait_id");
    const int other = table.column("other_gait_id");
    if (subject < 0 || preferred < 0 || other < 0)
        throw InvalidArgument(prefs_csv.string() + ": need subject_id, preferred_gait_id, other_gait_id columns");

    struct Loaded {
        GaitTerms terms;
        double static_value;
    };
    std::map<std::string, Loaded> cache;
    auto load = [&](const std::string & id) -> const Loaded & {
        auto it = cache.find(id);
        if (it == cache.end()) {
            const GaitTrajectory traj = read_trajectory_csv(traj_dir / (id + ".csv"), id);
            it = cache.emplace(id, Loaded{extract_features(traj), static_cost(traj)}).first;
        }
        return it->second;
    };

    std::vector<PreferencePair> pairs;
    for (const auto & row : table.rows) {
        PreferencePair p;
        p.subject_id = row.at(subject);
        p.preferred_id = row.at(preferred);
        p.other_id = row.at(other);
        const Loaded & a = load(p.preferred_id);
        const Loaded & b = load(p.other_id);
        p.preferred = a.terms;
        p.preferred_static = a.static_value;
        p.other = b.terms;
        p.other_static = b.static_value;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

void write_report_csv(std::ostream & out, const std::vector<SubjectScore> & scores) {
    out << "cost_kind,subject_id,accuracy_pct,w1,w2,w3,w4,feasible\n";
    auto num = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
    for (const auto & s : scores) {
        out << to_string(s.kind) << ',' << s.subject_id << ',' << num(s.accuracy_pct);
        for (int i = 0; i < 4; ++i) out << ',' << num(s.w[i]);
        out << ',' << (s.feasible ? "true" : "false") << '\n';
    }
}

}  // namespace linecospar
