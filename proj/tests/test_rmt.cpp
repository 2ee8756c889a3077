#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rank1am/rmt.hpp"

using namespace rank1am;

namespace {

const QuadratureRule& rule() {
    static const QuadratureRule r = build_reflected_rule(128);
    return r;
}

}  // namespace

TEST_CASE("d = 1 trace inverse is the scalar reciprocal") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const GramDraw draw = draw_gram(64, 1, seed);
        double acc = 0.0;
        for (int i = 0; i < 64; ++i) {
            acc += draw.g(i) * draw.g(i) * draw.x(i, 0) * draw.x(i, 0);
        }
        const GramSample s = sample_gram(64, 1, seed);
        CHECK(std::fabs(s.trace_inv - 1.0 / acc) <= 1e-12);
    }
}

TEST_CASE("sample_gram statistics are positive and reproducible") {
    const GramSample a = sample_gram(400, 20, 7);
    const GramSample b = sample_gram(400, 20, 7);
    CHECK(a.trace_inv == b.trace_inv);
    CHECK(a.trace_inv > 0.0);
    CHECK(a.lambda_min_over_n > 0.0);
    CHECK(a.lambda_max_over_n >= a.lambda_min_over_n);
    CHECK_THROWS_AS(sample_gram(10, 10, 0), std::invalid_argument);
}

TEST_CASE("trace-inverse sanity sandwich from the same spectrum") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const int n = 500, d = 25;
        const GramSample s = sample_gram(n, d, seed);
        const GramDraw draw = draw_gram(n, d, seed);
        // d / lambda_max(X^T G^2 X) <= tau_hat <= d / lambda_min(X^T G^2 X)
        CHECK(s.trace_inv >= d / (s.lambda_max_over_n * n) - 1e-12);
        CHECK(s.trace_inv <= d / (s.lambda_min_over_n * n) + 1e-12);
        // and the looser bound via max g_i^2 * lambda_max(X^T X)
        Eigen::MatrixXd xtx = draw.x.transpose() * draw.x;
        const double lmax_x = xtx.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
        const double gmax = draw.g.cwiseAbs().maxCoeff();
        CHECK(s.trace_inv >= d / (gmax * gmax * lmax_x) - 1e-12);
    }
}

TEST_CASE("appending a row never increases the trace inverse") {
    // Loewner order: adding g^2 x x^T grows the Gram matrix.
    const int n = 40, d = 6;
    const GramDraw draw = draw_gram(n + 1, d, 11);
    auto trace_inv_of = [&](int rows) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < rows; ++i) {
            m += draw.g(i) * draw.g(i) * draw.x.row(i).transpose() * draw.x.row(i);
        }
        return m.inverse().trace();
    };
    double prev = trace_inv_of(n - 8);
    for (int rows = n - 7; rows <= n + 1; ++rows) {
        const double cur = trace_inv_of(rows);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("trace inverse concentrates around 1/C(lambda)") {
    // Desk-scale version of the acceptance run: d = 50, n in {500, 2000}.
    const int d = 50;
    const auto report = concentration_report({500, 2000}, d, 20, 123, rule());
    REQUIRE(report.size() == 2);
    for (const auto& row : report) {
        CHECK(row.tau == doctest::Approx(1.0 / solve_c(row.n / double(d), rule()).c_lambda));
        CHECK(row.band_hits >= 0.9);
        CHECK(row.min_lambda_min_over_n > 0.0);
    }
    // mean |tau_hat - tau| shrinks when n quadruples at fixed d
    CHECK(report[1].mean_abs_dev < report[0].mean_abs_dev);
}

TEST_CASE("mean deviation halves under 4x growth at fixed d/n ratio") {
    const auto small = concentration_report({500}, 50, 20, 31, rule());
    const auto big = concentration_report({2000}, 200, 20, 31, rule());
    const double shrink = small[0].mean_abs_dev / big[0].mean_abs_dev;
    CHECK(shrink >= 1.3);
    CHECK(shrink <= 3.2);
}

TEST_CASE("concentration_report is deterministic across thread counts") {
    const auto a = concentration_report({300}, 20, 8, 5, rule(), 1);
    const auto b = concentration_report({300}, 20, 8, 5, rule(), 4);
    CHECK(a[0].mean_abs_dev == b[0].mean_abs_dev);
    CHECK(a[0].std_dev == b[0].std_dev);
    CHECK(a[0].band_hits == b[0].band_hits);
}
