#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rank1am/harness.hpp"

using namespace rank1am;
using Kind = NonlinearitySpec::Kind;

namespace {

const QuadratureRule& rule() {
    static const QuadratureRule r = build_reflected_rule(128);
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentSpec tiny_spec(std::uint64_t seed, int trials, int iters, int threads) {
    ExperimentSpec spec;
    spec.problem = ProblemConfig::make(24, 6.0, 0.1, NonlinearitySpec::identity(), iters, seed);
    spec.trials = trials;
    spec.threads = threads;
    spec.experiment_id = "tiny";
    return spec;
}

}  // namespace

TEST_CASE("fmt_real: 17 significant digits, inf/nan spelling") {
    CHECK(fmt_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(fmt_real(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(fmt_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(fmt_real(0.1) == "0.10000000000000001");
    CHECK(fmt_real(1.0) == "1");
}

TEST_CASE("estimate_floor: plateau median and failure modes") {
    CHECK(estimate_floor({9.0, 5.0, 1.01, 1.0, 1.02, 0.99, 1.03}) == doctest::Approx(1.01));
    // strictly decreasing, no plateau
    CHECK_THROWS_AS(estimate_floor({32.0, 16.0, 8.0, 4.0, 2.0, 1.0}), NotConvergedError);
    CHECK_THROWS_AS(estimate_floor({1.0, 1.0, 1.0}), NotConvergedError);
}

TEST_CASE("fit_rate: exact geometric residual of the deterministic identity recursion") {
    // lambda = 5 contracts slowly enough to leave several pre-floor points
    const ModelConstants mc = solve_c(5.0, rule());
    const double sigma = 0.1;
    const double a = (1.0 + sigma * sigma) / mc.c_lambda;
    const double xstar = sigma * sigma / (mc.c_lambda - 1.0 - sigma * sigma);
    std::vector<double> series{50.0};
    for (int t = 0; t < 8; ++t) {
        const double x = series.back();
        series.push_back(h(h(x, Kind::identity, sigma, mc, rule()), Kind::identity, sigma, mc,
                           rule()));
    }
    const double fitted = fit_rate(series, xstar);
    CHECK(std::fabs(fitted - a * a) <= 1e-8);
}

TEST_CASE("fit_rate: window errors") {
    // constant series has no pre-floor points above 10x its own floor
    const std::vector<double> constant(8, 3.0);
    CHECK_THROWS_AS(fit_rate(constant, estimate_floor(constant)), WindowError);
    CHECK_THROWS_AS(fit_rate({100.0, 1.0, 1.0, 1.0, 1.0, 1.0}, 0.9), WindowError);
}

TEST_CASE("fit_rate: half-step series exponentiates to a full-iteration factor") {
    std::vector<double> halves;
    const double rho = 0.05;
    double x = 100.0;
    for (int i = 0; i < 10; ++i) {
        halves.push_back(x);
        x *= rho;
    }
    const double fitted = fit_rate(halves, 0.0, /*steps_per_iteration=*/2);
    CHECK(fitted == doctest::Approx(rho * rho).epsilon(1e-10));
}

TEST_CASE("classify_model recovers the generating deterministic recursion") {
    const ModelConstants mc = solve_c(50.0, rule());
    const double sigma = 0.1;
    for (Kind truth_kind : {Kind::identity, Kind::sign}) {
        Trajectory traj;
        traj.init_state = StatePoint{0.07, 0.99};
        double x = traj.init_state.ratio_sq();
        for (int t = 0; t < 8; ++t) {
            x = h(h(x, truth_kind, sigma, mc, rule()), truth_kind, sigma, mc, rule());
            TrajectoryRow row;
            row.mu_state = StatePoint{1.0, std::sqrt(x)};
            row.ratio_emp = x;
            traj.rows.push_back(row);
        }
        const ClassifyResult res = classify_model(traj, mc, sigma, rule());
        CHECK(res.model == truth_kind);
        const double own_dist =
            truth_kind == Kind::identity ? res.dist_identity : res.dist_sign;
        CHECK(own_dist <= 1e-16);
    }
}

TEST_CASE("classify_model rejects too-short trajectories") {
    const ModelConstants mc = solve_c(50.0, rule());
    Trajectory traj;
    traj.init_state = StatePoint{0.1, 1.0};
    for (int t = 0; t < 3; ++t) {
        TrajectoryRow row;
        row.ratio_emp = 1.0;
        traj.rows.push_back(row);
    }
    CHECK_THROWS_AS(classify_model(traj, mc, 0.1, rule()), WindowError);
}

TEST_CASE("degenerate aggregation: trials = 1, T = 1 collapses the quantiles") {
    ExperimentSpec spec = tiny_spec(3, 1, 1, 1);
    const auto results = run_experiment(spec);
    REQUIRE(results.size() == 1);
    const TrialSummary& s = results[0].summary;
    REQUIRE(s.ratio_stats.size() == 1);
    const double r = results[0].trajectories[0].rows[0].ratio_emp;
    CHECK(s.ratio_stats[0].min == r);
    CHECK(s.ratio_stats[0].q25 == r);
    CHECK(s.ratio_stats[0].median == r);
    CHECK(s.ratio_stats[0].q75 == r);
    CHECK(s.ratio_stats[0].max == r);
}

TEST_CASE("aggregation sanity: quantiles ordered at every iteration") {
    ExperimentSpec spec = tiny_spec(11, 9, 4, 0);
    const auto results = run_experiment(spec);
    for (const IterStats& q : results[0].summary.ratio_stats) {
        CHECK(q.min <= q.q25);
        CHECK(q.q25 <= q.median);
        CHECK(q.median <= q.q75);
        CHECK(q.q75 <= q.max);
    }
}

TEST_CASE("reproducibility: byte-identical CSVs across thread counts") {
    namespace fs = std::filesystem;
    const fs::path dir1 = fs::temp_directory_path() / "rank1am_t1";
    const fs::path dir2 = fs::temp_directory_path() / "rank1am_t4";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    ExperimentSpec spec1 = tiny_spec(42, 6, 3, 1);
    spec1.out_dir = dir1.string();
    spec1.emit_svg = true;
    ExperimentSpec spec2 = tiny_spec(42, 6, 3, 4);
    spec2.out_dir = dir2.string();
    spec2.emit_svg = true;
    run_experiment(spec1);
    run_experiment(spec2);

    for (const char* name :
         {"tiny_id_d24_L6_s0.1_trials.csv", "tiny_id_d24_L6_s0.1_summary.csv",
          "tiny_config.txt", "tiny_id_d24_L6_s0.1_band.svg"}) {
        const std::string a = slurp((dir1 / name).string());
        const std::string b = slurp((dir2 / name).string());
        CHECK(!a.empty());
        CHECK(a == b);
    }
}

TEST_CASE("per-trial CSV carries the pinned schema") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rank1am_schema";
    fs::remove_all(dir);
    ExperimentSpec spec = tiny_spec(5, 2, 2, 1);
    spec.out_dir = dir.string();
    run_experiment(spec);
    std::ifstream in((dir / "tiny_id_d24_L6_s0.1_trials.csv").string());
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "experiment_id,model,d,lambda,sigma,trial,iter,half,alpha_emp,beta_emp,alpha_det,"
          "beta_det_sq,ratio_emp,ratio_det,alpha_pop");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2 * 2 * 2);  // trials x iters x halves
}

TEST_CASE("config file parsing") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "rank1am_cfg.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "model = sign\n";
        out << "d=100   # trailing comment\n";
        out << "sigma = 0.25\n";
        out << "\n";
    }
    const auto kv = parse_config_file(path.string());
    CHECK(kv.at("model") == "sign");
    CHECK(kv.at("d") == "100");
    CHECK(kv.at("sigma") == "0.25");
    CHECK(kv.size() == 3);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/cfg"), ConfigError);

    {
        std::ofstream out(path);
        out << "novalue\n";
    }
    CHECK_THROWS_AS(parse_config_file(path.string()), ConfigError);
}

TEST_CASE("rate-floor consistency on the deterministic identity sequence") {
    const ModelConstants mc = solve_c(10.0, rule());
    const double sigma = 0.2;
    const double c = mc.c_lambda;
    const double xstar = sigma * sigma / (c - 1.0 - sigma * sigma);
    const double rho_full = std::pow((1.0 + sigma * sigma) / c, 2);
    // +4 so all five tail entries sit past the convergence bound
    const int iters = static_cast<int>(
        std::ceil(3.0 * std::log(1.0 / xstar) / std::log(1.0 / rho_full))) + 4;
    std::vector<double> series{20.0};
    for (int t = 0; t < iters; ++t) {
        series.push_back(h(h(series.back(), Kind::identity, sigma, mc, rule()), Kind::identity,
                           sigma, mc, rule()));
    }
    CHECK(estimate_floor(series) == doctest::Approx(xstar).epsilon(0.01));
}

TEST_CASE("rotated truth reproduces the e1-frame state evolution statistics") {
    // rotation invariance of the Gaussian design: the summary statistics
    // from a rotated run stay in the same regime as the pinned-truth run
    ExperimentSpec pinned = tiny_spec(77, 8, 4, 0);
    ExperimentSpec rotated = tiny_spec(77, 8, 4, 0);
    rotated.rotate_truth = true;
    const auto a = run_experiment(pinned);
    const auto b = run_experiment(rotated);
    for (std::size_t t = 0; t < 4; ++t) {
        const double ma = a[0].summary.ratio_stats[t].median;
        const double mb = b[0].summary.ratio_stats[t].median;
        CHECK(mb <= 30.0 * ma);
        CHECK(ma <= 30.0 * mb);
    }
}

TEST_CASE("sweep points enumerate the cartesian product") {
    ExperimentSpec spec = tiny_spec(8, 2, 2, 1);
    spec.sweep_lambda = {5.0, 8.0};
    spec.sweep_model = {Kind::identity, Kind::sign};
    const auto results = run_experiment(spec);
    REQUIRE(results.size() == 4);
    CHECK(results[0].point.model == Kind::identity);
    CHECK(results[0].point.lambda == 5.0);
    CHECK(results[3].point.model == Kind::sign);
    CHECK(results[3].point.lambda == 8.0);
    for (const auto& res : results) {
        CHECK(res.trajectories.size() == 2);
        CHECK(res.summary.ratio_stats.size() == 2);
    }
}

TEST_CASE("model name round trip") {
    CHECK(parse_model("id") == Kind::identity);
    CHECK(parse_model("identity") == Kind::identity);
    CHECK(parse_model("sign") == Kind::sign);
    CHECK_THROWS_AS(parse_model("relu"), ConfigError);
    CHECK(model_name(Kind::sign) == "sign");
}
