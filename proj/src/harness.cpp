#include "linecospar/harness.hpp"

#include "linecospar/csv.hpp"
#include "linecospar/errors.hpp"
#include "linecospar/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <new>
#include <ostream>
#include <random>
#include <thread>

namespace linecospar {

namespace {

constexpr std::uint64_t kSubjectTag = 1;
constexpr std::uint64_t kPolynomialTag = 2;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

int worker_count(int requested, int tasks) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(n, 1, std::max(1, tasks));
}

// Runs body(i) for i in [0, n) on `jobs` threads.
template <class Body>
void parallel_for(int n, int jobs, Body body) {
    const int workers = worker_count(jobs, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto & th : pool) th.join();
}

std::string na_or(const std::optional<double> & v) { return v ? format_double(*v) : "NA"; }

}  // namespace

void ExperimentConfig::validate() const {
    if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
    if (runs < 1) throw InvalidArgument("runs must be at least 1");
    if (granularity < 2) throw InvalidArgument("granularity must be at least 2");
    if (dims < 1) throw InvalidArgument("dims must be positive");
    if (objective == ObjectiveKind::Hartmann3 && dims != 3) throw DimensionMismatch("h3 is 3-dimensional");
    if (objective == ObjectiveKind::Hartmann6 && dims != 6) throw DimensionMismatch("h6 is 6-dimensional");
    if (!std::isfinite(noise_ch) || noise_ch < 0.0) throw InvalidArgument("noise_ch must be finite and >= 0");
    if (poly_repeats < 1) throw InvalidArgument("poly_repeats must be at least 1");
    gp.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(tag)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

ObjectiveSpec objective_for_run(const ExperimentConfig & cfg, int run) {
    switch (cfg.objective) {
    case ObjectiveKind::Hartmann3: return ObjectiveSpec::hartmann3();
    case ObjectiveKind::Hartmann6: return ObjectiveSpec::hartmann6();
    case ObjectiveKind::RandomPolynomial: {
        std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(run / cfg.poly_repeats), kPolynomialTag));
        ObjectiveSpec obj = ObjectiveSpec::random_polynomial(cfg.dims, rng);
        obj.poly_quadratic = cfg.poly_quadratic;
        return obj;
    }
    }
    throw InvalidArgument("unknown objective kind");
}

RunResult run_single(const ExperimentConfig & cfg, int run) {
    cfg.validate();
    RunResult result;
    result.run = run;
    result.objective = objective_for_run(cfg, run);
    try {
        SimSubject subject(result.objective, cfg.noise_ch, cfg.coactive,
                           derive_seed(cfg.seed, static_cast<std::uint64_t>(run), kSubjectTag));
        OptimizerConfig oc;
        oc.dims = cfg.dims;
        oc.granularity = cfg.granularity;
        oc.gp = cfg.gp;
        oc.mode = CandidateMode::Line;
        Optimizer opt(oc, cfg.seed + static_cast<std::uint64_t>(run));
        const double step = 1.0 / (cfg.granularity - 1);

        result.rows.reserve(cfg.iterations);
        result.visited.reserve(cfg.iterations);
        for (int t = 1; t <= cfg.iterations; ++t) {
            const auto t0 = Clock::now();
            const Action action = opt.propose_next();
            const auto t1 = Clock::now();
            const FeedbackBundle fb = subject.feedback(action, opt.last_action() ? &*opt.last_action() : nullptr, step);
            const auto t2 = Clock::now();
            const std::size_t v_size = opt.posterior()->size();
            opt.absorb_feedback(action, fb);
            const auto t3 = Clock::now();

            TraceRow row;
            row.run = run;
            row.t = t;
            row.sampled_obj = evaluate(result.objective, action.coords);
            row.posterior_max_obj = evaluate(result.objective, opt.incumbent().coords);
            row.v_size = v_size;
            row.wall_ms = elapsed_ms((t1 - t0) + (t3 - t2));
            if (v_size > static_cast<std::size_t>(cfg.granularity + 2 * (t - 1))) ++result.bound_violations;
            result.rows.push_back(row);
            result.visited.push_back(action.coords);
        }

        const UtilityPosterior post = opt.evidence_posterior();
        const Eigen::Index best = argmax_first(post.mean);
        result.a_max = post.points[best].coords;
        result.a_max_obj = evaluate(result.objective, result.a_max);
        result.posterior_points.reserve(post.size());
        for (const auto & p : post.points) result.posterior_points.push_back(p.coords);
        result.posterior_mean = post.mean;
    } catch (const Error & e) {
        result.error = e.what();
    }
    return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig & cfg) {
    cfg.validate();
    std::vector<RunResult> results(cfg.runs);
    parallel_for(cfg.runs, cfg.jobs, [&](int r) { results[r] = run_single(cfg, r); });
    return results;
}

std::vector<AggregateRow> aggregate(const std::vector<RunResult> & runs, TraceMetric metric) {
    std::size_t length = 0;
    for (const auto & r : runs) length = std::max(length, r.rows.size());
    std::vector<AggregateRow> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        std::vector<double> values;
        for (const auto & r : runs) {
            if (i >= r.rows.size()) continue;
            values.push_back(metric == TraceMetric::SampledObjective ? r.rows[i].sampled_obj
                                                                     : r.rows[i].posterior_max_obj);
        }
        AggregateRow row;
        row.t = static_cast<int>(i) + 1;
        row.n = static_cast<int>(values.size());
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean = sum / row.n;
        if (row.n > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean) * (v - row.mean);
            row.sd = std::sqrt(ss / (row.n - 1));
        }
        out.push_back(row);
    }
    return out;
}

double mean_a_max_objective(const std::vector<RunResult> & runs) {
    double sum = 0.0;
    int n = 0;
    for (const auto & r : runs) {
        if (!r.error.empty()) continue;
        sum += r.a_max_obj;
        ++n;
    }
    return n ? sum / n : std::nan("");
}

int total_bound_violations(const std::vector<RunResult> & runs) {
    int total = 0;
    for (const auto & r : runs) total += r.bound_violations;
    return total;
}

std::vector<NoiseSweepResult> run_noise_sweep(const ExperimentConfig & base, const std::vector<double> & ch_values) {
    if (ch_values.empty()) throw InvalidArgument("noise sweep needs at least one c_h value");
    std::vector<NoiseSweepResult> sweep;
    for (double ch : ch_values) {
        ExperimentConfig cfg = base;
        cfg.noise_ch = ch;
        sweep.push_back({ch, run_experiment(cfg)});
    }
    return sweep;
}

std::vector<ScalingRow> run_scaling(const ScalingConfig & cfg) {
    if (cfg.dims.empty()) throw InvalidArgument("scaling needs at least one dimension");
    if (cfg.iterations < 1 || cfg.runs < 1) throw InvalidArgument("scaling needs iterations and runs >= 1");
    if (cfg.granularity < 2) throw InvalidArgument("granularity must be at least 2");

    auto experiment = [&](int d, int iterations, int runs) {
        ExperimentConfig ec;
        ec.objective = ObjectiveKind::RandomPolynomial;
        ec.dims = d;
        ec.granularity = cfg.granularity;
        ec.iterations = iterations;
        ec.runs = runs;
        ec.seed = cfg.seed;
        ec.gp = cfg.gp;
        ec.jobs = 1;
        return ec;
    };

    // Warm caches and the allocator before anything is timed.
    run_experiment(experiment(cfg.dims.front(), std::min(cfg.iterations, 5), 1));

    std::vector<ScalingRow> rows;
    for (int d : cfg.dims) {
        const ExperimentConfig ec = experiment(d, cfg.iterations, cfg.runs);
        const auto runs = run_experiment(ec);
        double sum = 0.0;
        int n = 0;
        for (const auto & r : runs) {
            if (!r.error.empty()) throw Error("scaling run failed at d=" + std::to_string(d) + ": " + r.error);
            for (const auto & row : r.rows) {
                sum += row.wall_ms;
                ++n;
            }
        }
        rows.push_back({"linecospar", d, sum / n, false, total_bound_violations(runs)});

        ScalingRow base{"baseline", d, std::nan(""), false, 0};
        const double grid_points = std::pow(static_cast<double>(cfg.granularity), d);
        if (grid_points > kMaxGridPoints || grid_points > cfg.baseline_max_points) {
            base.skipped = true;
        } else try {
            sum = 0.0;
            n = 0;
            for (int r = 0; r < cfg.runs; ++r) {
                SimSubject subject(objective_for_run(ec, r), 0.0, false,
                                   derive_seed(cfg.seed, static_cast<std::uint64_t>(r), kSubjectTag));
                FeedbackOracle oracle = [&](const Action & current, const Action * previous) {
                    return subject.feedback(current, previous, 1.0 / (cfg.granularity - 1));
                };
                const auto trace = run_baseline_grid(ActionSpace::unit(d, cfg.granularity), cfg.gp, oracle,
                                                     cfg.iterations, cfg.seed + static_cast<std::uint64_t>(r));
                for (const auto & it : trace) {
                    sum += it.wall_ms;
                    ++n;
                }
            }
            base.mean_iter_ms = sum / n;
        } catch (const std::bad_alloc &) {
            std::cerr << "warning: baseline at d=" << d << " needs more memory than available; skipped\n";
            base.skipped = true;
            base.mean_iter_ms = std::nan("");
        }
        rows.push_back(base);
    }
    return rows;
}

void write_trace_csv(std::ostream & out, const std::vector<RunResult> & runs) {
    out << "run,t,sampled_obj,posterior_max_obj,v_size,wall_ms\n";
    for (const auto & r : runs) {
        for (const auto & row : r.rows) {
            out << row.run << ',' << row.t << ',' << format_double(row.sampled_obj) << ','
                << format_double(row.posterior_max_obj) << ',' << row.v_size << ',' << format_double(row.wall_ms)
                << '\n';
        }
    }
}

void write_aggregate_csv(std::ostream & out, const std::vector<AggregateRow> & rows) {
    out << "t,mean,sd\n";
    for (const auto & row : rows) out << row.t << ',' << format_double(row.mean) << ',' << format_double(row.sd) << '\n';
}

void write_noise_sweep_csv(std::ostream & out, const std::vector<NoiseSweepResult> & sweep) {
    out << "ch,t,mean,sd\n";
    for (const auto & s : sweep) {
        for (const auto & row : aggregate(s.runs, TraceMetric::PosteriorMaxObjective)) {
            out << format_double(s.noise_ch) << ',' << row.t << ',' << format_double(row.mean) << ','
                << format_double(row.sd) << '\n';
        }
    }
}

void write_scaling_csv(std::ostream & out, const std::vector<ScalingRow> & rows) {
    out << "algo,d,mean_iter_ms,skipped\n";
    for (const auto & row : rows) {
        out << row.algo << ',' << row.d << ',' << (row.skipped ? "NA" : format_double(row.mean_iter_ms)) << ','
            << (row.skipped ? 1 : 0) << '\n';
    }
}

void write_correlation_csv(std::ostream & out, const VisitationCorrelation & corr) {
    out << "dim,bin,visits,mean_utility\n";
    for (const auto & c : corr.cells) out << c.dim << ',' << c.bin << ',' << c.visits << ',' << na_or(c.mean_utility) << '\n';
    out << "r," << (corr.pooled ? format_double(corr.pooled->r) : "NA") << '\n';
    out << "p," << (corr.pooled ? format_double(corr.pooled->p) : "NA") << '\n';
}

void write_visits_csv(std::ostream & out, const std::vector<RunResult> & runs) {
    const int d = runs.empty() || runs.front().visited.empty() ? 0 : static_cast<int>(runs.front().visited.front().size());
    out << "run,t";
    for (int i = 0; i < d; ++i) out << ",x" << i;
    out << '\n';
    for (const auto & r : runs) {
        for (std::size_t t = 0; t < r.visited.size(); ++t) {
            out << r.run << ',' << t + 1;
            for (int i = 0; i < d; ++i) out << ',' << format_double(r.visited[t][i]);
            out << '\n';
        }
    }
}

void write_final_posterior_csv(std::ostream & out, const std::vector<RunResult> & runs) {
    int d = 0;
    for (const auto & r : runs)
        if (!r.posterior_points.empty()) d = static_cast<int>(r.posterior_points.front().size());
    out << "run,point";
    for (int i = 0; i < d; ++i) out << ",x" << i;
    out << ",mean\n";
    for (const auto & r : runs) {
        for (std::size_t k = 0; k < r.posterior_points.size(); ++k) {
            out << r.run << ',' << k;
            for (int i = 0; i < d; ++i) out << ',' << format_double(r.posterior_points[k][i]);
            out << ',' << format_double(r.posterior_mean[static_cast<Eigen::Index>(k)]) << '\n';
        }
    }
}

namespace {

std::vector<int> coordinate_columns(const CsvTable & table) {
    std::vector<int> cols;
    for (int i = 0;; ++i) {
        const int c = table.column("x" + std::to_string(i));
        if (c < 0) break;
        cols.push_back(c);
    }
    return cols;
}

Eigen::VectorXd row_coords(const std::vector<std::string> & row, const std::vector<int> & cols) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (static_cast<std::size_t>(cols[i]) >= row.size()) throw InvalidArgument("short CSV row");
        x[static_cast<Eigen::Index>(i)] = parse_double(row[cols[i]]);
    }
    return x;
}

}  // namespace

VisitationCorrelation correlate_trace_dir(const std::filesystem::path & dir, int bins) {
    const CsvTable visits = read_csv(dir / "visits.csv");
    const CsvTable post = read_csv(dir / "final_posterior.csv");
    const auto vcols = coordinate_columns(visits);
    const auto pcols = coordinate_columns(post);
    if (vcols.empty() || vcols.size() != pcols.size())
        throw DimensionMismatch("visits.csv and final_posterior.csv disagree on the dimension");
    const int mean_col = post.column("mean");
    if (mean_col < 0) throw InvalidArgument("final_posterior.csv has no mean column");

    std::vector<Eigen::VectorXd> visited, points;
    for (const auto & row : visits.rows) visited.push_back(row_coords(row, vcols));
    Eigen::VectorXd mean(static_cast<Eigen::Index>(post.rows.size()));
    for (std::size_t k = 0; k < post.rows.size(); ++k) {
        points.push_back(row_coords(post.rows[k], pcols));
        mean[static_cast<Eigen::Index>(k)] = parse_double(post.rows[k].at(mean_col));
    }
    return visitation_correlation(visited, points, mean, bins);
}

}  // namespace linecospar
