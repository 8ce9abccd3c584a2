#include "linecospar/errors.hpp"
#include "linecospar/gaitfit.hpp"
#include "linecospar/harness.hpp"
#include "linecospar/session.hpp"

#include "CLI11.hpp"
#include "httplib.h"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace linecospar;

namespace {

struct BenchOptions {
    std::string objective = "h3";
    int dims = 0;
    int granularity = 30;
    int iters = 100;
    int runs = 1;
    double noise_ch = 0.0;
    bool coactive = false;
    std::uint64_t seed = 0;
    int jobs = 0;
    int poly_repeats = 1;
    bool poly_quadratic = false;
    std::string out = "out";
};

void add_bench_options(CLI::App * cmd, BenchOptions & o) {
    cmd->add_option("--objective", o.objective, "h3, h6 or poly")->check(CLI::IsMember({"h3", "h6", "poly"}));
    cmd->add_option("--dims", o.dims, "dimension (default 3 for h3, 6 for h6 and poly)");
    cmd->add_option("--granularity", o.granularity, "points per line m")->capture_default_str();
    cmd->add_option("--iters", o.iters, "iterations per run")->capture_default_str();
    cmd->add_option("--runs", o.runs, "independent runs")->capture_default_str();
    cmd->add_option("--noise-ch", o.noise_ch, "preference noise c_h (0 = ideal)")->capture_default_str();
    cmd->add_flag("--coactive", o.coactive, "simulate coactive suggestions");
    cmd->add_option("--seed", o.seed, "base seed")->capture_default_str();
    cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--poly-repeats", o.poly_repeats, "consecutive runs sharing one random polynomial");
    cmd->add_flag("--poly-quadratic", o.poly_quadratic, "add -sum (a-0.5)^2 to the polynomial");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

ExperimentConfig to_config(const BenchOptions & o) {
    ExperimentConfig cfg;
    cfg.objective = objective_kind_from_string(o.objective);
    cfg.dims = o.dims > 0 ? o.dims : (cfg.objective == ObjectiveKind::Hartmann3 ? 3 : 6);
    cfg.granularity = o.granularity;
    cfg.iterations = o.iters;
    cfg.runs = o.runs;
    cfg.noise_ch = o.noise_ch;
    cfg.coactive = o.coactive;
    cfg.seed = o.seed;
    cfg.jobs = o.jobs;
    cfg.poly_repeats = o.poly_repeats;
    cfg.poly_quadratic = o.poly_quadratic;
    return cfg;
}

std::ofstream open_out(const fs::path & path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    return out;
}

void report_failures(const std::vector<RunResult> & runs) {
    for (const auto & r : runs)
        if (!r.error.empty()) std::cerr << "run " << r.run << " failed: " << r.error << '\n';
}

}  // namespace

int main(int argc, char ** argv) {
    CLI::App app{"LineCoSpar preference-based optimization toolkit"};
    app.require_subcommand(1);

    BenchOptions bench;
    auto * bench_cmd = app.add_subcommand("bench", "simulated convergence runs");
    add_bench_options(bench_cmd, bench);

    BenchOptions sweep;
    std::vector<double> ch_list{0.1, 0.5, 2.0};
    auto * sweep_cmd = app.add_subcommand("noise-sweep", "repeat bench for several c_h values");
    add_bench_options(sweep_cmd, sweep);
    sweep_cmd->add_option("--ch-list", ch_list, "comma-separated c_h values")->delimiter(',');

    ScalingConfig scaling;
    std::string scaling_out = "out";
    auto * scaling_cmd = app.add_subcommand("scaling", "per-iteration time against the full-grid baseline");
    scaling_cmd->add_option("--dims-list", scaling.dims, "comma-separated dimensions")->delimiter(',');
    scaling_cmd->add_option("--granularity", scaling.granularity)->capture_default_str();
    scaling_cmd->add_option("--iters", scaling.iterations)->capture_default_str();
    scaling_cmd->add_option("--runs", scaling.runs)->capture_default_str();
    scaling_cmd->add_option("--seed", scaling.seed)->capture_default_str();
    scaling_cmd->add_option("--baseline-max-points", scaling.baseline_max_points,
                            "largest grid m^d timed for the full-grid baseline")
        ->capture_default_str();
    scaling_cmd->add_option("--out", scaling_out, "output directory")->capture_default_str();

    std::string trace_dir;
    int bins = 10;
    std::string corr_out;
    auto * corr_cmd = app.add_subcommand("correlate", "visitation vs posterior utility correlation of a bench run");
    corr_cmd->add_option("--trace-dir", trace_dir, "directory written by bench")->required();
    corr_cmd->add_option("--bins", bins)->capture_default_str();
    corr_cmd->add_option("--out", corr_out, "output file (default <trace-dir>/correlation.csv)");

    std::string traj_dir, prefs, fit_out = "report.csv";
    bool holdout = false;
    auto * fit_cmd = app.add_subcommand("fit-cost", "fit LIPM cost weights to gait preferences");
    fit_cmd->add_option("--traj-dir", traj_dir, "directory of <gait_id>.csv trajectories")->required();
    fit_cmd->add_option("--prefs", prefs, "subject_id,preferred_gait_id,other_gait_id")->required();
    fit_cmd->add_option("--out", fit_out)->capture_default_str();
    fit_cmd->add_flag("--holdout", holdout, "leave-one-subject-out evaluation");

    LipmConfig lipm;
    std::string lipm_out = "traj.csv";
    std::vector<double> com0{0.0, 0.0}, vcom0{0.0, 0.0}, cop{0.0, 0.0}, com_goal{0.0, 0.0}, foot_start{0.0, 0.0},
        foot_goal{0.0, 0.0};
    auto * lipm_cmd = app.add_subcommand("simulate-lipm", "integrate the linear inverted pendulum");
    lipm_cmd->add_option("--z0", lipm.z0, "CoM height in m")->capture_default_str();
    lipm_cmd->add_option("--duration", lipm.duration, "seconds")->capture_default_str();
    lipm_cmd->add_option("--dt", lipm.dt, "sample period in s")->capture_default_str();
    lipm_cmd->add_option("--g", lipm.g)->capture_default_str();
    lipm_cmd->add_option("--com0", com0, "x,y")->delimiter(',')->expected(2);
    lipm_cmd->add_option("--vcom0", vcom0, "x,y")->delimiter(',')->expected(2);
    lipm_cmd->add_option("--cop", cop, "fixed CoP x,y")->delimiter(',')->expected(2);
    lipm_cmd->add_option("--com-goal", com_goal, "x,y")->delimiter(',')->expected(2);
    lipm_cmd->add_option("--foot-start", foot_start, "x,y")->delimiter(',')->expected(2);
    lipm_cmd->add_option("--foot-goal", foot_goal, "x,y")->delimiter(',')->expected(2);
    lipm_cmd->add_option("--out", lipm_out)->capture_default_str();

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string log_dir;
    auto * serve_cmd = app.add_subcommand("serve", "HTTP session service");
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--log-dir", log_dir, "event log directory (replayed on start)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bench_cmd) {
            const ExperimentConfig cfg = to_config(bench);
            const auto runs = run_experiment(cfg);
            report_failures(runs);
            const fs::path dir = bench.out;
            auto trace = open_out(dir / "trace.csv");
            write_trace_csv(trace, runs);
            auto agg = open_out(dir / "aggregate.csv");
            write_aggregate_csv(agg, aggregate(runs, TraceMetric::SampledObjective));
            auto visits = open_out(dir / "visits.csv");
            write_visits_csv(visits, runs);
            auto post = open_out(dir / "final_posterior.csv");
            write_final_posterior_csv(post, runs);
            std::cout << "mean a_max objective " << mean_a_max_objective(runs) << ", |V_t| bound violations "
                      << total_bound_violations(runs) << '\n';
        } else if (*sweep_cmd) {
            const auto result = run_noise_sweep(to_config(sweep), ch_list);
            auto out = open_out(fs::path(sweep.out) / "aggregate.csv");
            write_noise_sweep_csv(out, result);
            for (const auto & s : result) {
                report_failures(s.runs);
                std::cout << "c_h " << s.noise_ch << ": mean a_max objective " << mean_a_max_objective(s.runs) << '\n';
            }
        } else if (*scaling_cmd) {
            const auto rows = run_scaling(scaling);
            auto out = open_out(fs::path(scaling_out) / "scaling.csv");
            write_scaling_csv(out, rows);
            write_scaling_csv(std::cout, rows);
        } else if (*corr_cmd) {
            const auto corr = correlate_trace_dir(trace_dir, bins);
            auto out = open_out(corr_out.empty() ? fs::path(trace_dir) / "correlation.csv" : fs::path(corr_out));
            write_correlation_csv(out, corr);
            if (corr.pooled)
                std::cout << "r = " << corr.pooled->r << ", p = " << corr.pooled->p << '\n';
            else
                std::cout << "correlation undefined\n";
        } else if (*fit_cmd) {
            const auto pairs = load_preferences(prefs, traj_dir);
            std::vector<SubjectScore> scores;
            for (CostKind kind : {CostKind::Lipm, CostKind::Static, CostKind::Dynamic}) {
                auto s = predictive_power(pairs, kind, holdout);
                scores.insert(scores.end(), s.begin(), s.end());
            }
            auto out = open_out(fit_out);
            write_report_csv(out, scores);
            write_report_csv(std::cout, scores);
        } else if (*lipm_cmd) {
            lipm.com0 = {com0[0], com0[1]};
            lipm.vcom0 = {vcom0[0], vcom0[1]};
            lipm.cop = {CopStep{0.0, cop[0], cop[1]}};
            lipm.com_goal = {com_goal[0], com_goal[1]};
            lipm.foot_start = {foot_start[0], foot_start[1]};
            lipm.foot_goal = {foot_goal[0], foot_goal[1]};
            auto out = open_out(lipm_out);
            write_trajectory_csv(out, simulate_lipm(lipm));
        } else if (*serve_cmd) {
            SessionManager manager(log_dir.empty() ? std::nullopt : std::optional<fs::path>(log_dir));
            const std::size_t restored = manager.load_logs();
            httplib::Server server;
            install_routes(server, manager);
            std::cerr << "restored " << restored << " session(s); listening on " << host << ':' << port << '\n';
            if (!server.listen(host, port)) {
                std::cerr << "cannot listen on " << host << ':' << port << '\n';
                return 1;
            }
        }
    } catch (const Error & e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
