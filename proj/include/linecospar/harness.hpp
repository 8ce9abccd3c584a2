#pragma once

#include "linecospar/oracles.hpp"
#include "linecospar/prefgp.hpp"
#include "linecospar/stats.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace linecospar {

struct ExperimentConfig {
    ObjectiveKind objective = ObjectiveKind::Hartmann3;
    int dims = 3;
    int granularity = 30;
    int iterations = 100;
    int runs = 1;
    double noise_ch = 0.0;
    bool coactive = false;
    std::uint64_t seed = 0;
    // RandomPolynomial: consecutive runs sharing one polynomial.
    int poly_repeats = 1;
    bool poly_quadratic = false;
    GpConfig gp;
    int jobs = 0;  // worker threads, 0 = hardware concurrency

    void validate() const;
};

struct TraceRow {
    int run = 0;
    int t = 0;
    double sampled_obj = 0.0;        // f(a_t)
    double posterior_max_obj = 0.0;  // f(p_{t+1}), argmax of μ_t over V_t
    std::size_t v_size = 0;
    double wall_ms = 0.0;
};

struct RunResult {
    int run = 0;
    ObjectiveSpec objective;
    std::vector<TraceRow> rows;
    Eigen::VectorXd a_max;
    double a_max_obj = 0.0;
    std::vector<Eigen::VectorXd> visited;  // a_1 .. a_T
    std::vector<Eigen::VectorXd> posterior_points;
    Eigen::VectorXd posterior_mean;
    int bound_violations = 0;  // iterations with |V_t| > m + 2(t-1)
    std::string error;         // empty unless the run aborted
};

// Derives an independent 64-bit seed from (seed, index, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag);

// Objective of run `run`: the fixed Hartmann function, or the random
// polynomial number run / poly_repeats.
ObjectiveSpec objective_for_run(const ExperimentConfig & cfg, int run);

RunResult run_single(const ExperimentConfig & cfg, int run);

// All runs, in run order. Numerical failures are kept in RunResult::error.
std::vector<RunResult> run_experiment(const ExperimentConfig & cfg);

struct AggregateRow {
    int t = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 for a single value
    int n = 0;
};

enum class TraceMetric { SampledObjective, PosteriorMaxObjective };

// Mean and SD across runs for every iteration index.
std::vector<AggregateRow> aggregate(const std::vector<RunResult> & runs, TraceMetric metric);

double mean_a_max_objective(const std::vector<RunResult> & runs);
int total_bound_violations(const std::vector<RunResult> & runs);

struct NoiseSweepResult {
    double noise_ch = 0.0;
    std::vector<RunResult> runs;
};

std::vector<NoiseSweepResult> run_noise_sweep(const ExperimentConfig & base, const std::vector<double> & ch_values);

struct ScalingRow {
    std::string algo;  // "linecospar" or "baseline"
    int d = 0;
    double mean_iter_ms = 0.0;
    bool skipped = false;
    int bound_violations = 0;
};

struct ScalingConfig {
    std::vector<int> dims{1, 2, 3, 4, 5, 6};
    int granularity = 10;
    int iterations = 20;
    int runs = 5;
    std::uint64_t seed = 0;
    // The baseline runs only where m^d is at most this (and at most kMaxGridPoints).
    double baseline_max_points = kMaxGridPoints;
    GpConfig gp;
};

// Times LineCoSpar and the full-grid baseline per dimension on random
// polynomial objectives, one run at a time. Baseline rows whose grid exceeds
// the point limit, or whose dense posterior cannot be allocated, are marked
// skipped.
std::vector<ScalingRow> run_scaling(const ScalingConfig & cfg);

// CSV writers. Floats use 17 significant digits.
void write_trace_csv(std::ostream & out, const std::vector<RunResult> & runs);
void write_aggregate_csv(std::ostream & out, const std::vector<AggregateRow> & rows);
void write_noise_sweep_csv(std::ostream & out, const std::vector<NoiseSweepResult> & sweep);
void write_scaling_csv(std::ostream & out, const std::vector<ScalingRow> & rows);
void write_correlation_csv(std::ostream & out, const VisitationCorrelation & corr);
// run,t,x0..x{d-1}
void write_visits_csv(std::ostream & out, const std::vector<RunResult> & runs);
// run,point,x0..x{d-1},mean
void write_final_posterior_csv(std::ostream & out, const std::vector<RunResult> & runs);

// Pools visits.csv and final_posterior.csv of a bench output directory.
VisitationCorrelation correlate_trace_dir(const std::filesystem::path & dir, int bins);

}  // namespace linecospar
