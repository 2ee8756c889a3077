#include "rank1am/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

namespace rank1am {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

// Linear-interpolated quantile of a sorted vector; +inf entries propagate.
double quantile_sorted(const std::vector<double>& v, double p) {
    const double idx = p * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    const auto hi = static_cast<std::size_t>(std::ceil(idx));
    if (lo == hi) return v[lo];
    const double w = idx - static_cast<double>(lo);
    if (std::isinf(v[hi])) return w > 0.0 ? v[hi] : v[lo];
    return (1.0 - w) * v[lo] + w * v[hi];
}

double median_of(std::vector<double> v) {
    std::erase_if(v, [](double x) { return !std::isfinite(x); });
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

double half_ratio(const StatePoint& s) {
    if (s.alpha == 0.0) return std::numeric_limits<double>::infinity();
    return s.ratio_sq();
}

}  // namespace

std::string fmt_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string model_name(NonlinearitySpec::Kind kind) {
    switch (kind) {
        case NonlinearitySpec::Kind::identity: return "id";
        case NonlinearitySpec::Kind::sign: return "sign";
        case NonlinearitySpec::Kind::custom: return "custom";
    }
    return "custom";
}

NonlinearitySpec::Kind parse_model(const std::string& name) {
    if (name == "id" || name == "identity") return NonlinearitySpec::Kind::identity;
    if (name == "sign" || name == "sgn") return NonlinearitySpec::Kind::sign;
    throw ConfigError("unknown model '" + name + "' (expected id or sign)");
}

std::string SweepPoint::label() const {
    std::ostringstream os;
    os << model_name(model) << "_d" << d << "_L" << lambda << "_s" << sigma;
    return os.str();
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

double estimate_floor(const std::vector<double>& ratio_series) {
    std::vector<double> tail;
    for (double r : ratio_series)
        if (std::isfinite(r)) tail.push_back(r);
    if (tail.size() < 5) throw NotConvergedError("estimate_floor: fewer than 5 finite ratios");
    tail.erase(tail.begin(), tail.end() - 5);
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    if (*lo <= 0.0 || *hi / *lo - 1.0 >= 0.5) {
        throw NotConvergedError("estimate_floor: last 5 ratios vary by >= 50%, no plateau");
    }
    std::sort(tail.begin(), tail.end());
    return tail[2];
}

double fit_rate(const std::vector<double>& ratio_series, double floor_hat,
                int steps_per_iteration) {
    if (steps_per_iteration < 1) throw std::invalid_argument("fit_rate: bad steps_per_iteration");
    std::vector<double> ts, ys;
    for (std::size_t t = 0; t < ratio_series.size(); ++t) {
        const double r = ratio_series[t];
        if (!std::isfinite(r) || r <= 10.0 * floor_hat || r <= floor_hat) continue;
        ts.push_back(static_cast<double>(t));
        ys.push_back(std::log(r - floor_hat));
    }
    if (ts.size() < 3) {
        throw WindowError("fit_rate: need >= 3 pre-floor points, have " +
                          std::to_string(ts.size()));
    }
    const auto m = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    return std::exp(slope * steps_per_iteration);
}

ClassifyResult classify_model(const Trajectory& trajectory, const ModelConstants& mc,
                              double sigma, const QuadratureRule& rule) {
    std::vector<double> ratios;
    for (const auto& row : trajectory.rows) ratios.push_back(row.ratio_emp);
    int finite = 0;
    for (double r : ratios)
        if (std::isfinite(r) && r > 0.0) ++finite;
    if (finite < 5) throw WindowError("classify_model: need >= 5 finite-ratio iterations");

    // Deterministic squared-ratio recursions of both candidate models from
    // the same initial ratio; a full iteration is h o h.
    const double x0 = trajectory.init_state.ratio_sq();
    std::vector<double> det_id, det_sgn;
    double xi = x0, xs = x0;
    for (std::size_t t = 0; t < ratios.size(); ++t) {
        xi = h(h(xi, NonlinearitySpec::Kind::identity, sigma, mc, rule),
               NonlinearitySpec::Kind::identity, sigma, mc, rule);
        xs = h(h(xs, NonlinearitySpec::Kind::sign, sigma, mc, rule),
               NonlinearitySpec::Kind::sign, sigma, mc, rule);
        det_id.push_back(xi);
        det_sgn.push_back(xs);
    }

    // Distance over every finite-ratio iteration. The error-floor region
    // must participate: the two candidate recursions separate most at their
    // floors (sigma^2/C vs (1+sigma^2)/C), while the one or two pre-floor
    // transient points carry the initialization-dominated noise.
    double di = 0.0, ds = 0.0;
    int used = 0;
    for (std::size_t t = 0; t < ratios.size(); ++t) {
        const double r = ratios[t];
        if (!std::isfinite(r) || r <= 0.0) continue;
        const double li = std::log(r) - std::log(det_id[t]);
        const double ls = std::log(r) - std::log(det_sgn[t]);
        di += li * li;
        ds += ls * ls;
        ++used;
    }

    ClassifyResult res;
    res.dist_identity = di / used;
    res.dist_sign = ds / used;
    res.model = (res.dist_sign < res.dist_identity - 1e-9) ? NonlinearitySpec::Kind::sign
                                                           : NonlinearitySpec::Kind::identity;
    return res;
}

Containment band_containment(const TrialSummary& summary) {
    double floor_ref = summary.floor_hat;
    if (!std::isfinite(floor_ref)) {
        floor_ref = *std::min_element(summary.det_ratio.begin(), summary.det_ratio.end());
    }
    Containment c;
    int det_in = 0, pop_in = 0;
    for (std::size_t t = 0; t < summary.det_ratio.size(); ++t) {
        if (!(summary.det_ratio[t] > 10.0 * floor_ref)) continue;
        ++c.prefloor_iters;
        if (summary.det_ratio[t] >= summary.ratio_stats[t].min &&
            summary.det_ratio[t] <= summary.ratio_stats[t].max)
            ++det_in;
        if (0.0 >= summary.ratio_stats[t].min) ++pop_in;
    }
    if (c.prefloor_iters > 0) {
        c.det_contained = static_cast<double>(det_in) / c.prefloor_iters;
        c.pop_contained = static_cast<double>(pop_in) / c.prefloor_iters;
    }
    return c;
}

namespace {

std::vector<SweepPoint> enumerate_points(const ExperimentSpec& spec) {
    auto models = spec.sweep_model;
    if (models.empty()) models = {spec.problem.psi.kind};
    auto ds = spec.sweep_d;
    if (ds.empty()) ds = {spec.problem.d};
    auto lambdas = spec.sweep_lambda;
    if (lambdas.empty()) lambdas = {spec.problem.lambda};
    auto sigmas = spec.sweep_sigma;
    if (sigmas.empty()) sigmas = {spec.problem.sigma};

    std::vector<SweepPoint> points;
    for (auto m : models)
        for (int d : ds)
            for (double l : lambdas)
                for (double s : sigmas) points.push_back(SweepPoint{m, d, l, s});
    return points;
}

NonlinearitySpec spec_for(NonlinearitySpec::Kind kind, const NonlinearitySpec& base) {
    switch (kind) {
        case NonlinearitySpec::Kind::identity: return NonlinearitySpec::identity();
        case NonlinearitySpec::Kind::sign: return NonlinearitySpec::sign();
        case NonlinearitySpec::Kind::custom: return base;
    }
    return base;
}

void write_resolved_config(const ExperimentSpec& spec, const std::vector<SweepPoint>& points,
                           const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "experiment_id=" << spec.experiment_id << "\n";
    out << "trials=" << spec.trials << "\n";
    out << "iters=" << spec.problem.iterations << "\n";
    out << "seed=" << spec.problem.master_seed << "\n";
    if (spec.problem.init.mode == InitSpec::Mode::explicit_state) {
        out << "init=explicit\n";
        out << "alpha0=" << fmt_real(spec.problem.init.alpha0) << "\n";
        out << "beta0=" << fmt_real(spec.problem.init.beta0) << "\n";
    } else {
        out << "init=ball\n";
    }
    out << "emit_svg=" << (spec.emit_svg ? 1 : 0) << "\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << "point." << i << "=" << model_name(points[i].model) << ",d=" << points[i].d
            << ",lambda=" << fmt_real(points[i].lambda) << ",sigma=" << fmt_real(points[i].sigma)
            << "\n";
    }
}

void write_trials_csv(const ExperimentSpec& spec, const SweepPoint& pt,
                      const std::vector<Trajectory>& trajs,
                      const std::vector<std::string>& errors, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "experiment_id,model,d,lambda,sigma,trial,iter,half,alpha_emp,beta_emp,alpha_det,"
           "beta_det_sq,ratio_emp,ratio_det,alpha_pop\n";
    const std::string prefix = spec.experiment_id + "," + model_name(pt.model) + "," +
                               std::to_string(pt.d) + "," + fmt_real(pt.lambda) + "," +
                               fmt_real(pt.sigma) + ",";
    for (std::size_t trial = 0; trial < trajs.size(); ++trial) {
        if (!errors[trial].empty()) continue;  // failure already recorded in summary log
        const auto& rows = trajs[trial].rows;
        for (std::size_t t = 0; t < rows.size(); ++t) {
            const auto& r = rows[t];
            auto emit = [&](const char* half, const StatePoint& s, const Prediction& p,
                            const Prediction& pop) {
                out << prefix << trial << "," << (t + 1) << "," << half << ","
                    << fmt_real(s.alpha) << "," << fmt_real(s.beta) << ","
                    << fmt_real(p.alpha_det) << "," << fmt_real(p.beta_det_sq) << ","
                    << fmt_real(half_ratio(s)) << ","
                    << fmt_real(p.alpha_det == 0.0 ? std::numeric_limits<double>::infinity()
                                                   : p.ratio_sq())
                    << "," << fmt_real(pop.alpha_det) << "\n";
            };
            emit("nu", r.nu_state, r.nu_pred, r.nu_pop);
            emit("mu", r.mu_state, r.mu_pred, r.mu_pop);
        }
    }
}

void write_summary_csv(const ExperimentSpec& spec, const SweepPoint& pt,
                       const TrialSummary& summary, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "experiment_id,model,d,lambda,sigma,iter,ratio_min,ratio_q25,ratio_median,"
           "ratio_q75,ratio_max,ratio_det,med_alpha_dev_nu,med_beta_sq_dev_nu,"
           "med_alpha_dev_mu,med_beta_sq_dev_mu,fitted_rate,floor_hat\n";
    const std::string prefix = spec.experiment_id + "," + model_name(pt.model) + "," +
                               std::to_string(pt.d) + "," + fmt_real(pt.lambda) + "," +
                               fmt_real(pt.sigma) + ",";
    for (std::size_t t = 0; t < summary.ratio_stats.size(); ++t) {
        const auto& q = summary.ratio_stats[t];
        out << prefix << (t + 1) << "," << fmt_real(q.min) << "," << fmt_real(q.q25) << ","
            << fmt_real(q.median) << "," << fmt_real(q.q75) << "," << fmt_real(q.max) << ","
            << fmt_real(summary.det_ratio[t]) << "," << fmt_real(summary.med_alpha_dev[2 * t])
            << "," << fmt_real(summary.med_beta_sq_dev[2 * t]) << ","
            << fmt_real(summary.med_alpha_dev[2 * t + 1]) << ","
            << fmt_real(summary.med_beta_sq_dev[2 * t + 1]) << ","
            << fmt_real(summary.fitted_rate) << "," << fmt_real(summary.floor_hat) << "\n";
    }
}

}  // namespace

std::vector<SweepResult> run_experiment(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
    const std::vector<SweepPoint> points = enumerate_points(spec);
    const QuadratureRule rule = build_reflected_rule(kDefaultOrder1d);

    const bool to_files = !spec.out_dir.empty();
    if (to_files) {
        std::filesystem::create_directories(spec.out_dir);
        write_resolved_config(spec, points,
                              spec.out_dir + "/" + spec.experiment_id + "_config.txt");
    }

    if (spec.problem.init.mode == InitSpec::Mode::random_unit_ball && spec.problem.d < 130) {
        std::cerr << "run_experiment: d = " << spec.problem.d
                  << " < 130; the random-initialization guarantee holds with probability "
                     "0.95 only for d >= 130\n";
    }

    std::vector<SweepResult> results;
    results.reserve(points.size());
    std::map<double, ModelConstants> mc_memo;  // per-lambda, shared across points
    for (const SweepPoint& pt : points) {
        ProblemConfig cfg = spec.problem;
        cfg.d = pt.d;
        cfg.lambda = pt.lambda;
        cfg.sigma = pt.sigma;
        cfg.psi = spec_for(pt.model, spec.problem.psi);
        cfg.n = static_cast<int>(std::llround(pt.lambda * pt.d));
        cfg.validate();
        auto memo = mc_memo.find(cfg.lambda);
        if (memo == mc_memo.end()) {
            memo = mc_memo.emplace(cfg.lambda, solve_c(cfg.lambda, rule)).first;
        }
        const ModelConstants& mc = memo->second;
        auto truth = make_truth(cfg);
        if (spec.rotate_truth) truth = rotate_truth(truth, cfg.master_seed);

        // Explicit inits are stated relative to the truth frame; under a
        // rotated truth, rebuild them from the rotated basis.
        Eigen::VectorXd explicit_init;
        if (cfg.init.mode == InitSpec::Mode::explicit_state) {
            Eigen::Index j;
            truth.first.cwiseAbs().minCoeff(&j);
            Eigen::VectorXd orth = Eigen::VectorXd::Unit(cfg.d, j);
            orth -= orth.dot(truth.first) * truth.first;
            orth.normalize();
            explicit_init = cfg.init.alpha0 * truth.first + cfg.init.beta0 * orth;
        }

        SweepResult res;
        res.point = pt;
        res.trajectories.resize(spec.trials);
        res.trial_errors.assign(spec.trials, std::string());
        std::vector<std::string>& errors = res.trial_errors;
        parallel_for(spec.trials, spec.threads, [&](int trial) {
            try {
                const Eigen::VectorXd mu0 = cfg.init.mode == InitSpec::Mode::explicit_state
                                                ? explicit_init
                                                : random_init(cfg, trial);
                res.trajectories[trial] = run_trajectory(cfg, truth, mu0, mc, rule, trial);
            } catch (const std::exception& e) {
                errors[trial] = e.what();
            }
        });

        int failed = 0;
        for (int trial = 0; trial < spec.trials; ++trial) {
            if (!errors[trial].empty()) {
                ++failed;
                std::cerr << "run_experiment[" << pt.label() << "] trial " << trial
                          << " failed: " << errors[trial] << "\n";
            }
        }
        if (failed == spec.trials) {
            throw NumericError("run_experiment: all trials failed at " + pt.label());
        }

        // Log inits that fall outside the random-initialization band; they
        // are kept, not resampled.
        if (cfg.init.mode == InitSpec::Mode::random_unit_ball) {
            const double a_lo = 1.0 / (50.0 * std::sqrt(static_cast<double>(cfg.d)));
            const double a_hi =
                std::sqrt((1.0 + cfg.sigma * cfg.sigma) / mc.c_lambda) / 30.0;
            for (int trial = 0; trial < spec.trials; ++trial) {
                if (!errors[trial].empty()) continue;
                const StatePoint& s0 = res.trajectories[trial].init_state;
                const double a0 = std::fabs(s0.alpha);
                const double b0sq = s0.beta * s0.beta;
                if (a0 < a_lo || a0 > a_hi || b0sq < 0.8 || b0sq > 1.2) {
                    std::cerr << "run_experiment[" << pt.label() << "] trial " << trial
                              << ": init (|alpha0|=" << a0 << ", beta0^2=" << b0sq
                              << ") outside the random-init band\n";
                }
            }
        }

        // Aggregate in trial order.
        const int iters = cfg.iterations;
        TrialSummary& sum = res.summary;
        sum.ratio_stats.resize(iters);
        sum.med_alpha_dev.assign(2 * iters, kNaN);
        sum.med_beta_sq_dev.assign(2 * iters, kNaN);
        for (int t = 0; t < iters; ++t) {
            std::vector<double> ratios;
            std::vector<double> da_nu, db_nu, da_mu, db_mu;
            for (int trial = 0; trial < spec.trials; ++trial) {
                if (!errors[trial].empty()) continue;
                const TrajectoryRow& r = res.trajectories[trial].rows[t];
                ratios.push_back(r.ratio_emp);
                da_nu.push_back(std::fabs(r.nu_state.alpha - r.nu_pred.alpha_det));
                db_nu.push_back(std::fabs(r.nu_state.beta * r.nu_state.beta -
                                          r.nu_pred.beta_det_sq));
                da_mu.push_back(std::fabs(r.mu_state.alpha - r.mu_pred.alpha_det));
                db_mu.push_back(std::fabs(r.mu_state.beta * r.mu_state.beta -
                                          r.mu_pred.beta_det_sq));
            }
            std::sort(ratios.begin(), ratios.end());
            IterStats& q = sum.ratio_stats[t];
            q.min = ratios.front();
            q.q25 = quantile_sorted(ratios, 0.25);
            q.median = quantile_sorted(ratios, 0.5);
            q.q75 = quantile_sorted(ratios, 0.75);
            q.max = ratios.back();
            sum.med_alpha_dev[2 * t] = median_of(da_nu);
            sum.med_beta_sq_dev[2 * t] = median_of(db_nu);
            sum.med_alpha_dev[2 * t + 1] = median_of(da_mu);
            sum.med_beta_sq_dev[2 * t + 1] = median_of(db_mu);
        }

        // Pure deterministic recursion from the median initial state.
        {
            std::vector<double> a0s, b0s;
            for (int trial = 0; trial < spec.trials; ++trial) {
                if (!errors[trial].empty()) continue;
                a0s.push_back(std::fabs(res.trajectories[trial].init_state.alpha));
                b0s.push_back(res.trajectories[trial].init_state.beta);
            }
            const StatePoint med_init{median_of(a0s), median_of(b0s)};
            const auto det = det_trajectory(med_init, cfg.psi, cfg.sigma, mc, rule, iters);
            for (const DetStep& step : det) sum.det_ratio.push_back(step.mu_half.ratio_sq());
        }

        // Per-trial floors and fitted rates; NaN where the estimator balks.
        for (int trial = 0; trial < spec.trials; ++trial) {
            if (!errors[trial].empty()) {
                sum.floors.push_back(kNaN);
                sum.fitted_rates.push_back(kNaN);
                continue;
            }
            const Trajectory& traj = res.trajectories[trial];
            std::vector<double> full_series, half_series;
            half_series.push_back(half_ratio(traj.init_state));
            for (const TrajectoryRow& r : traj.rows) {
                full_series.push_back(r.ratio_emp);
                half_series.push_back(half_ratio(r.nu_state));
                half_series.push_back(half_ratio(r.mu_state));
            }
            double fl = kNaN;
            try {
                fl = estimate_floor(full_series);
            } catch (const NotConvergedError&) {
            }
            sum.floors.push_back(fl);
            double rate = kNaN;
            if (std::isfinite(fl)) {
                try {
                    rate = fit_rate(half_series, fl, /*steps_per_iteration=*/2);
                } catch (const WindowError&) {
                }
            }
            sum.fitted_rates.push_back(rate);
        }
        sum.floor_hat = median_of(sum.floors);
        sum.fitted_rate = median_of(sum.fitted_rates);

        if (to_files) {
            const std::string base = spec.out_dir + "/" + spec.experiment_id + "_" + pt.label();
            write_trials_csv(spec, pt, res.trajectories, errors, base + "_trials.csv");
            write_summary_csv(spec, pt, sum, base + "_summary.csv");
            if (spec.emit_svg) {
                write_band_svg(base + "_band.svg", spec.experiment_id + " " + pt.label(),
                               sum.ratio_stats, sum.det_ratio);
            }
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace rank1am
