// rank1am: sample-split alternating minimization for generalized rank-one
// matrix sensing, with deterministic state-evolution predictions.
//
// Subcommands: constants | predict | run | rmt | classify
// Exit codes: 0 ok, 2 config error, 3 numeric/solver error, 4 check failure.

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "rank1am/harness.hpp"

using namespace rank1am;

namespace {

struct RunOptions {
    std::string config_path;
    std::string model = "id";
    int d = 200;
    double lambda = 50.0;
    double sigma = 0.1;
    int trials = 50;
    int iters = 0;  // 0: default 2*ceil(log_lambda d) + 10
    std::uint64_t seed = 1;
    std::string init = "ball";
    double alpha0 = 0.0;
    double beta0 = 0.0;
    std::string out = "out";
    std::string id = "exp";
    bool emit_svg = false;
    bool check = false;
    int threads = 0;
    bool rotate = false;
    // optional sweeps; the scalar fields above seed any empty list
    std::vector<std::string> model_list;
    std::vector<int> d_list;
    std::vector<double> lambda_list;
    std::vector<double> sigma_list;
};

int default_iters(int d, double lambda) {
    const double t = std::log(static_cast<double>(d)) / std::log(lambda);
    return 2 * static_cast<int>(std::ceil(t)) + 10;
}

// File values fill in whatever was not given on the command line.
void apply_config_file(RunOptions& o, const CLI::App* cmd) {
    if (o.config_path.empty()) return;
    const auto kv = parse_config_file(o.config_path);
    auto get = [&](const char* key, const char* flag, auto& slot) {
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        const auto* opt = cmd->get_option_no_throw(flag);
        if (opt != nullptr && opt->count() > 0) return;  // CLI overrides file
        using T = std::decay_t<decltype(slot)>;
        if constexpr (std::is_same_v<T, std::string>) {
            slot = it->second;
        } else if constexpr (std::is_same_v<T, bool>) {
            slot = it->second == "1" || it->second == "true";
        } else if constexpr (std::is_same_v<T, int>) {
            slot = std::stoi(it->second);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            slot = std::stoull(it->second);
        } else {
            slot = std::stod(it->second);
        }
    };
    get("model", "--model", o.model);
    get("d", "--d", o.d);
    get("lambda", "--lambda", o.lambda);
    get("sigma", "--sigma", o.sigma);
    get("trials", "--trials", o.trials);
    get("iters", "--iters", o.iters);
    get("seed", "--seed", o.seed);
    get("init", "--init", o.init);
    get("alpha0", "--alpha0", o.alpha0);
    get("beta0", "--beta0", o.beta0);
    get("out", "--out", o.out);
    get("id", "--id", o.id);
    get("emit_svg", "--svg", o.emit_svg);
    get("threads", "--threads", o.threads);
}

ExperimentSpec build_spec(const RunOptions& o) {
    InitSpec init = InitSpec::random_ball();
    if (o.init == "explicit") {
        init = InitSpec::explicit_state_of(o.alpha0, o.beta0);
    } else if (o.init != "ball") {
        throw ConfigError("init must be 'ball' or 'explicit', got '" + o.init + "'");
    }
    NonlinearitySpec psi = parse_model(o.model) == NonlinearitySpec::Kind::sign
                               ? NonlinearitySpec::sign()
                               : NonlinearitySpec::identity();
    const int iters = o.iters > 0 ? o.iters : default_iters(o.d, o.lambda);
    ExperimentSpec spec;
    spec.problem = ProblemConfig::make(o.d, o.lambda, o.sigma, psi, iters, o.seed, init);
    spec.trials = o.trials;
    spec.out_dir = o.out;
    spec.emit_svg = o.emit_svg;
    spec.threads = o.threads;
    spec.experiment_id = o.id;
    spec.rotate_truth = o.rotate;
    for (const std::string& m : o.model_list) spec.sweep_model.push_back(parse_model(m));
    spec.sweep_d = o.d_list;
    spec.sweep_lambda = o.lambda_list;
    spec.sweep_sigma = o.sigma_list;
    return spec;
}

int cmd_constants(double lambda) {
    const QuadratureRule rule = build_reflected_rule(kDefaultOrder1d);
    const ModelConstants mc = solve_c(lambda, rule);
    std::cout << "lambda,c_lambda,tau,c2,c3\n";
    std::cout << fmt_real(mc.lambda) << "," << fmt_real(mc.c_lambda) << "," << fmt_real(mc.tau)
              << "," << fmt_real(mc.c2) << "," << fmt_real(mc.c3) << "\n";
    return 0;
}

int cmd_predict(const std::string& model, double lambda, double sigma, double alpha0,
                double beta0, int iters) {
    const QuadratureRule rule = build_reflected_rule(kDefaultOrder1d);
    const ModelConstants mc = solve_c(lambda, rule);
    const NonlinearitySpec psi = parse_model(model) == NonlinearitySpec::Kind::sign
                                     ? NonlinearitySpec::sign()
                                     : NonlinearitySpec::identity();
    const auto det = det_trajectory(StatePoint{alpha0, beta0}, psi, sigma, mc, rule, iters);
    std::cout << "iter,half,alpha_det,beta_det_sq,ratio_det\n";
    for (std::size_t t = 0; t < det.size(); ++t) {
        auto emit = [&](const char* half, const Prediction& p) {
            std::cout << (t + 1) << "," << half << "," << fmt_real(p.alpha_det) << ","
                      << fmt_real(p.beta_det_sq) << "," << fmt_real(p.ratio_sq()) << "\n";
        };
        emit("nu", det[t].nu_half);
        emit("mu", det[t].mu_half);
    }
    return 0;
}

int cmd_run(const RunOptions& o) {
    const ExperimentSpec spec = build_spec(o);
    const auto results = run_experiment(spec);
    bool ok = true;
    for (const auto& res : results) {
        std::cout << res.point.label() << ": floor_hat=" << fmt_real(res.summary.floor_hat)
                  << " fitted_rate=" << fmt_real(res.summary.fitted_rate);
        if (o.check) {
            const Containment c = band_containment(res.summary);
            std::cout << " prefloor_iters=" << c.prefloor_iters
                      << " det_contained=" << c.det_contained
                      << " pop_contained=" << c.pop_contained;
            if (!(c.prefloor_iters > 0 && c.det_contained >= 0.9 && c.pop_contained < 0.2))
                ok = false;
        }
        std::cout << "\n";
    }
    if (o.check && !ok) {
        std::cerr << "check failed: deterministic band containment criterion not met\n";
        return 4;
    }
    return 0;
}

int cmd_rmt(int d, const std::vector<double>& lambda_list, int trials, std::uint64_t seed,
            int threads) {
    const QuadratureRule rule = build_reflected_rule(kDefaultOrder1d);
    std::vector<int> n_list;
    for (double l : lambda_list) n_list.push_back(static_cast<int>(std::llround(l * d)));
    const auto report = concentration_report(n_list, d, trials, seed, rule, threads);
    std::cout << "n,d,lambda,tau,mean_abs_dev,std_dev,band_hits,min_lambda_min_over_n\n";
    for (const auto& row : report) {
        std::cout << row.n << "," << d << "," << fmt_real(static_cast<double>(row.n) / d) << ","
                  << fmt_real(row.tau) << "," << fmt_real(row.mean_abs_dev) << ","
                  << fmt_real(row.std_dev) << "," << fmt_real(row.band_hits) << ","
                  << fmt_real(row.min_lambda_min_over_n) << "\n";
    }
    return 0;
}

int cmd_classify(const RunOptions& o) {
    RunOptions local = o;
    local.out.clear();  // in-memory only
    ExperimentSpec spec = build_spec(local);
    spec.out_dir.clear();
    const auto results = run_experiment(spec);
    const QuadratureRule rule = build_reflected_rule(kDefaultOrder1d);
    const ModelConstants mc = solve_c(spec.problem.lambda, rule);

    std::cout << "trial,true_model,predicted,dist_id,dist_sign\n";
    int correct = 0, total = 0;
    for (const auto& res : results) {
        for (std::size_t trial = 0; trial < res.trajectories.size(); ++trial) {
            const auto cls =
                classify_model(res.trajectories[trial], mc, spec.problem.sigma, rule);
            std::cout << trial << "," << model_name(res.point.model) << ","
                      << model_name(cls.model) << "," << fmt_real(cls.dist_identity) << ","
                      << fmt_real(cls.dist_sign) << "\n";
            ++total;
            if (cls.model == res.point.model) ++correct;
        }
    }
    std::cerr << "accuracy: " << correct << "/" << total << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sample-split AM for generalized rank-one matrix sensing"};
    app.require_subcommand(1);

    double lambda_c = 50.0;
    auto* c_cmd = app.add_subcommand("constants", "print C(lambda), tau, C2, C3 as CSV");
    c_cmd->add_option("--lambda", lambda_c, "oversampling ratio")->required();

    std::string p_model = "id";
    double p_lambda = 50.0, p_sigma = 0.0, p_alpha0 = 0.1, p_beta0 = 1.0;
    int p_iters = 10;
    auto* p_cmd = app.add_subcommand("predict", "emit the deterministic trajectory as CSV");
    p_cmd->add_option("--model", p_model, "id or sign");
    p_cmd->add_option("--lambda", p_lambda, "oversampling ratio")->required();
    p_cmd->add_option("--sigma", p_sigma, "noise std");
    p_cmd->add_option("--alpha0", p_alpha0, "initial parallel component")->required();
    p_cmd->add_option("--beta0", p_beta0, "initial orthogonal norm")->required();
    p_cmd->add_option("--iters", p_iters, "iterations");

    RunOptions run_o;
    auto* r_cmd = app.add_subcommand("run", "run a Monte Carlo experiment and write CSV/SVG");
    r_cmd->add_option("--config", run_o.config_path, "key=value config file");
    auto add_common = [&](CLI::App* cmd, RunOptions& o) {
        cmd->add_option("--model", o.model, "id or sign");
        cmd->add_option("--d", o.d, "dimension");
        cmd->add_option("--lambda", o.lambda, "oversampling ratio");
        cmd->add_option("--sigma", o.sigma, "noise std");
        cmd->add_option("--trials", o.trials, "independent trials");
        cmd->add_option("--iters", o.iters, "iterations (0: default)");
        cmd->add_option("--seed", o.seed, "master seed");
        cmd->add_option("--init", o.init, "ball or explicit");
        cmd->add_option("--alpha0", o.alpha0, "explicit init alpha0");
        cmd->add_option("--beta0", o.beta0, "explicit init beta0");
        cmd->add_option("--threads", o.threads, "worker threads (0: hardware)");
    };
    add_common(r_cmd, run_o);
    r_cmd->add_option("--out", run_o.out, "output directory");
    r_cmd->add_option("--id", run_o.id, "experiment id prefix");
    r_cmd->add_flag("--svg", run_o.emit_svg, "also write SVG overlays");
    r_cmd->add_flag("--check", run_o.check, "apply the band-containment check (exit 4 on fail)");
    r_cmd->add_flag("--rotate-truth", run_o.rotate,
                    "debug: rotate the ground truth by a seeded random orthogonal matrix");
    r_cmd->add_option("--model-list", run_o.model_list, "sweep over models");
    r_cmd->add_option("--d-list", run_o.d_list, "sweep over dimensions");
    r_cmd->add_option("--lambda-list", run_o.lambda_list, "sweep over oversampling ratios");
    r_cmd->add_option("--sigma-list", run_o.sigma_list, "sweep over noise levels");

    int rmt_d = 200, rmt_trials = 20;
    std::vector<double> rmt_lambdas;
    std::uint64_t rmt_seed = 1;
    int rmt_threads = 0;
    auto* m_cmd = app.add_subcommand("rmt", "trace-inverse concentration report as CSV");
    m_cmd->add_option("--d", rmt_d, "dimension");
    m_cmd->add_option("--lambda-list", rmt_lambdas, "oversampling ratios")->required();
    m_cmd->add_option("--trials", rmt_trials, "samples per n");
    m_cmd->add_option("--seed", rmt_seed, "seed");
    m_cmd->add_option("--threads", rmt_threads, "worker threads (0: hardware)");

    RunOptions cls_o;
    auto* k_cmd = app.add_subcommand("classify", "run trials and classify the model per trial");
    k_cmd->add_option("--config", cls_o.config_path, "key=value config file");
    add_common(k_cmd, cls_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_cmd->parsed()) return cmd_constants(lambda_c);
        if (p_cmd->parsed())
            return cmd_predict(p_model, p_lambda, p_sigma, p_alpha0, p_beta0, p_iters);
        if (r_cmd->parsed()) {
            apply_config_file(run_o, r_cmd);
            return cmd_run(run_o);
        }
        if (m_cmd->parsed()) return cmd_rmt(rmt_d, rmt_lambdas, rmt_trials, rmt_seed, rmt_threads);
        if (k_cmd->parsed()) {
            apply_config_file(cls_o, k_cmd);
            return cmd_classify(cls_o);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
