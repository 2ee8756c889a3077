#include <doctest.h>

#include <cmath>
#include <limits>

#include "rank1am/constants.hpp"
#include "rank1am/sampler.hpp"

using namespace rank1am;

namespace {

const QuadratureRule& rule256() {
    static const QuadratureRule r = build_rule(256);
    return r;
}

double fixed_point_residual(const ModelConstants& mc) {
    const double lhs = expect1(
        [&](double g) { return g * g / (mc.c_lambda + g * g); }, rule256());
    return std::fabs(lhs - 1.0 / mc.lambda);
}

}  // namespace

TEST_CASE("solve_c rejects lambda <= 1") {
    CHECK_THROWS_AS(solve_c(1.0, rule256()), std::domain_error);
    CHECK_THROWS_AS(solve_c(0.5, rule256()), std::domain_error);
}

TEST_CASE("fixed point residual and sandwich") {
    for (double lambda : {2.0, 5.0, 10.0, 50.0, 100.0, 316.0}) {
        const ModelConstants mc = solve_c(lambda, rule256());
        CHECK(fixed_point_residual(mc) <= 1e-10);
        CHECK(mc.tau == doctest::Approx(1.0 / mc.c_lambda));
        if (lambda >= 10.0) {
            CHECK(mc.c_lambda >= 0.3 * lambda);
            CHECK(mc.c_lambda <= lambda);
        }
    }
}

TEST_CASE("C(10) lies inside the linear-growth bracket") {
    const ModelConstants mc = solve_c(10.0, rule256());
    CHECK(mc.c_lambda >= 3.0);
    CHECK(mc.c_lambda <= 10.0);
}

TEST_CASE("C(lambda) -> 0 as lambda -> 1+") {
    CHECK(solve_c(1.0 + 1e-6, rule256()).c_lambda <= 1e-4);
}

// Frozen from bisection on g(C) = E[G^2/(C+G^2)] - 1/50 with order-256
// quadrature at 30-digit precision; cross-checked below by seeded Monte
// Carlo within the CLT band.
TEST_CASE("C(50) matches the frozen solve") {
    const ModelConstants mc = solve_c(50.0, rule256());
    CHECK(std::fabs(mc.c_lambda - 47.111600275974804) <= 1e-8);

    CounterRng rng(stream_key(20240817, 0, 0, HalfStep::nu));
    const int n = 10'000'000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_normal();
        acc += g * g / (mc.c_lambda + g * g);
    }
    CHECK(std::fabs(acc / n - 1.0 / 50.0) <= 3e-3);
}

TEST_CASE("monotonicity of C in lambda") {
    double prev = 0.0;
    for (double lambda : {1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 316.0}) {
        const double c = solve_c(lambda, rule256()).c_lambda;
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("derived identities") {
    for (double lambda : {2.0, 5.0, 10.0, 50.0, 100.0}) {
        const ModelConstants mc = solve_c(lambda, rule256());
        // C*C2 + C3 = 1/Lambda
        CHECK(std::fabs(mc.c_lambda * mc.c2 + mc.c3 - 1.0 / lambda) <= 1e-9);
        // E[G^2/(1+tau G^2)] = C/Lambda
        const double lhs = expect1(
            [&](double g) { return g * g / (1.0 + mc.tau * g * g); }, rule256());
        CHECK(std::fabs(lhs - mc.c_lambda / lambda) <= 1e-9);
    }
}

TEST_CASE("phi basics") {
    CHECK(phi(0.0) == 0.0);
    CHECK(std::fabs(phi(std::numeric_limits<double>::infinity()) - 1.2533141373155003) <= 1e-12);
    // Frozen from adaptive quadrature of exp(-t^2/2) on [0,1] at 1e-10.
    CHECK(std::fabs(phi(1.0) - 0.85562439189214880) <= 1e-10);
    CHECK_THROWS_AS(phi(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST_CASE("phi is odd, monotone, and saturates") {
    double prev = -2.0;
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        const double v = phi(x);
        CHECK(v == -phi(-x));
        CHECK(v > prev);
        CHECK(std::fabs(v) <= 1.2533141373155003 + 1e-15);
        prev = v;
    }
}

TEST_CASE("h1/h2 vanish at 0 and reject negative x") {
    const ModelConstants mc = solve_c(50.0, rule256());
    CHECK(h1(0.0, mc, rule256()) == 0.0);
    CHECK(h2(0.0, mc, rule256()) == 0.0);
    CHECK_THROWS_AS(h1(-0.1, mc, rule256()), std::domain_error);
    CHECK_THROWS_AS(h2(-0.1, mc, rule256()), std::domain_error);
}

TEST_CASE("h1 sandwich and derivative bounds") {
    for (double lambda : {10.0, 50.0}) {
        const ModelConstants mc = solve_c(lambda, rule256());
        for (double x : {0.1, 1.0, 10.0}) {
            const double v = h1(x, mc, rule256());
            CHECK(v >= x / std::pow(1.0 + x * x, 1.5));
            CHECK(v <= std::max(x, 5.0));
        }
        // central difference h1'(1)
        const double step = 1e-5;
        const double d1 =
            (h1(1.0 + step, mc, rule256()) - h1(1.0 - step, mc, rule256())) / (2.0 * step);
        CHECK(d1 >= 1.0 / std::pow(2.0, 1.5));
        CHECK(d1 <= 5.0 / std::pow(2.0, 1.5));
    }
}

TEST_CASE("h1/h2 nondecreasing; h2' within [0, 30/(1+x^2)^2.5]") {
    const ModelConstants mc = solve_c(20.0, rule256());
    double p1 = -1.0, p2 = -1.0;
    for (double x = 0.0; x <= 12.0; x += 0.25) {
        const double v1 = h1(x, mc, rule256());
        const double v2 = h2(x, mc, rule256());
        CHECK(v1 >= p1);
        CHECK(v2 >= p2 - 1e-12);
        p1 = v1;
        p2 = v2;
    }
    const double step = 1e-5;
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double d2 =
            (h2(x + step, mc, rule256()) - h2(x - step, mc, rule256())) / (2.0 * step);
        CHECK(d2 >= -1e-8);
        CHECK(d2 <= 30.0 / std::pow(1.0 + x * x, 2.5));
    }
}

// The universal constant in h2 <= x v C has no pinned value; a dense
// grid scan pins the empirical supremum well below 2.
TEST_CASE("h2 stays below the empirical bound x v 2") {
    for (double lambda : {2.0, 10.0, 50.0, 316.0}) {
        const ModelConstants mc = solve_c(lambda, rule256());
        for (double x = 0.0; x <= 50.0; x += 0.5) {
            CHECK(h2(x, mc, rule256()) <= std::max(x, 2.0));
        }
        CHECK(h2(std::numeric_limits<double>::infinity(), mc, rule256()) <= 2.0);
    }
}
