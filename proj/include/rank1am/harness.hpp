#pragma once

#include <map>
#include <string>
#include <vector>

#include "rank1am/am.hpp"
#include "rank1am/rmt.hpp"

namespace rank1am {

/// One concrete (model, d, lambda, sigma) combination of a sweep.
struct SweepPoint {
    NonlinearitySpec::Kind model = NonlinearitySpec::Kind::identity;
    int d = 0;
    double lambda = 0.0;
    double sigma = 0.0;
    std::string label() const;
};

struct ExperimentSpec {
    ProblemConfig problem;  // base; sweeps override d/lambda/sigma/model
    int trials = 1;
    std::vector<NonlinearitySpec::Kind> sweep_model;
    std::vector<int> sweep_d;
    std::vector<double> sweep_lambda;
    std::vector<double> sweep_sigma;
    std::string out_dir;  // empty: no files written
    bool emit_svg = false;
    int threads = 0;  // 0: hardware concurrency
    std::string experiment_id = "exp";
    bool rotate_truth = false;  // debug: random orthogonal truth instead of e1
};

struct IterStats {
    double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

struct TrialSummary {
    std::vector<IterStats> ratio_stats;    // per full iteration, over trials
    std::vector<double> det_ratio;         // pure deterministic recursion, per iteration
    std::vector<double> med_alpha_dev;     // per half-step, median |alpha - alpha_det|
    std::vector<double> med_beta_sq_dev;   // per half-step, median |beta^2 - beta_det^2|
    std::vector<double> fitted_rates;      // per trial; NaN where the fit window failed
    std::vector<double> floors;            // per trial; NaN where no plateau
    double fitted_rate = 0.0;              // median of valid per-trial fits (NaN if none)
    double floor_hat = 0.0;                // median of valid per-trial floors (NaN if none)
};

struct SweepResult {
    SweepPoint point;
    TrialSummary summary;
    std::vector<Trajectory> trajectories;   // one per trial, in trial order
    std::vector<std::string> trial_errors;  // empty string = trial succeeded
};

/// Executes every (sweep point x trial), aggregates deterministically in
/// trial order, and writes the resolved config, per-trial CSV, summary CSV,
/// and optional SVG under spec.out_dir.
std::vector<SweepResult> run_experiment(const ExperimentSpec& spec);

/// OLS slope of log(ratio_t - floor_hat) over the pre-floor window
/// (ratio > 10 * floor_hat), exponentiated to a per-full-iteration
/// contraction factor; pass steps_per_iteration = 2 for half-step series.
double fit_rate(const std::vector<double>& ratio_series, double floor_hat,
                int steps_per_iteration = 1);

/// Median of the last five ratios, provided they vary by less than 50%.
double estimate_floor(const std::vector<double>& ratio_series);

struct ClassifyResult {
    NonlinearitySpec::Kind model = NonlinearitySpec::Kind::identity;
    double dist_identity = 0.0;
    double dist_sign = 0.0;
};

/// Compares the empirical squared-ratio trajectory against the h o h
/// recursions of both models (same initial ratio) by mean squared
/// log-distance over the finite-ratio iterations; ties break toward
/// identity. The floor region is included on purpose: the candidate
/// recursions separate most at their error floors.
ClassifyResult classify_model(const Trajectory& trajectory, const ModelConstants& mc,
                              double sigma, const QuadratureRule& rule);

/// Fraction of pre-floor iterations (deterministic ratio above 10x the
/// floor) for which the deterministic curve sits inside the empirical
/// [min, max] band, and ditto for the population ratio (identically 0 past
/// one step).
struct Containment {
    int prefloor_iters = 0;
    double det_contained = 0.0;
    double pop_contained = 0.0;
};
Containment band_containment(const TrialSummary& summary);

// --- formatting / io helpers shared by the CSV writers and the CLI ---

/// 17 significant digits; non-finite values spelled "inf"/"-inf"/"nan".
std::string fmt_real(double v);
std::string model_name(NonlinearitySpec::Kind kind);
NonlinearitySpec::Kind parse_model(const std::string& name);

/// key=value file, one pair per line; '#' starts a comment.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// SVG overlay: log-scale ratio vs iteration with the empirical band, the
/// median, the deterministic recursion, and the population prediction.
void write_band_svg(const std::string& path, const std::string& title,
                    const std::vector<IterStats>& band, const std::vector<double>& det_ratio);

}  // namespace rank1am
