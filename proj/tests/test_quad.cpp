#include <doctest.h>

#include <cmath>

#include "rank1am/quad.hpp"

using namespace rank1am;

namespace {
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // E|G| for G ~ N(0,1)
}

TEST_CASE("two-point rule is +-1 with equal weights") {
    const QuadratureRule r = build_rule(2);
    CHECK(r.nodes[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r.nodes[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.weights[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("order bounds are enforced") {
    CHECK_THROWS_AS(build_rule(1), std::invalid_argument);
    CHECK_THROWS_AS(build_rule(0), std::invalid_argument);
    CHECK_THROWS_AS(build_rule(513), std::invalid_argument);
    CHECK_NOTHROW(build_rule(512));
}

TEST_CASE("rule invariants: weight mass, node symmetry, unit variance") {
    for (int order : {2, 3, 16, 64, 129, 256, 512}) {
        const QuadratureRule r = build_rule(order);
        double mass = 0.0, var = 0.0;
        for (int i = 0; i < order; ++i) {
            mass += r.weights[i];
            var += r.weights[i] * r.nodes[i] * r.nodes[i];
            CHECK(r.weights[i] >= 0.0);
            CHECK(r.nodes[i] == -r.nodes[order - 1 - i]);
        }
        CHECK(std::fabs(mass - 1.0) <= 1e-12);
        CHECK(std::fabs(var - 1.0) <= 1e-10);
    }
}

TEST_CASE("low Gaussian moments are exact") {
    const QuadratureRule r = build_rule(64);
    double m4 = 0.0, m6 = 0.0;
    for (int i = 0; i < r.order; ++i) {
        const double n2 = r.nodes[i] * r.nodes[i];
        m4 += r.weights[i] * n2 * n2;
        m6 += r.weights[i] * n2 * n2 * n2;
    }
    CHECK(std::fabs(m4 - 3.0) <= 1e-9);
    CHECK(std::fabs(m6 - 15.0) <= 1e-8);
}

TEST_CASE("expect1 basics") {
    const QuadratureRule r = build_rule(128);
    CHECK(expect1([](double g) { return g * g; }, r) == doctest::Approx(1.0).epsilon(1e-13));
    // |g| has a kink, so the plain rule converges only algebraically...
    CHECK(std::fabs(expect1([](double g) { return std::fabs(g); }, r) - kSqrt2OverPi) <= 3e-3);
    // ...while the reflected half-range rule integrates it exactly.
    for (int order : {64, 128}) {
        const QuadratureRule refl = build_reflected_rule(order);
        CHECK(std::fabs(expect1([](double g) { return std::fabs(g); }, refl) - kSqrt2OverPi) <=
              1e-6);
    }
}

TEST_CASE("expect3 odd symmetry is exact") {
    const QuadratureRule r = build_rule(16);
    CHECK(std::fabs(expect3([](double g, double x, double v) { return g * x * v; }, r)) <=
          1e-14);
}

TEST_CASE("expect2 factorizes products") {
    const QuadratureRule r = build_rule(32);
    const double got = expect2([](double g, double x) { return g * g * x * x * x * x; }, r);
    CHECK(got == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("linearity of expect1") {
    const QuadratureRule r = build_rule(96);
    auto f = [](double g) { return std::exp(-g * g); };
    auto h = [](double g) { return std::cos(g); };
    const double a = 1.75, b = -0.4;
    const double lhs = expect1([&](double g) { return a * f(g) + b * h(g); }, r);
    const double rhs = a * expect1(f, r) + b * expect1(h, r);
    CHECK(std::fabs(lhs - rhs) <= 1e-12);
}

TEST_CASE("odd integrands vanish exactly") {
    const QuadratureRule r = build_rule(65);  // odd order includes the origin
    for (auto f : {+[](double g) { return g; }, +[](double g) { return g * g * g; },
                   +[](double g) { return std::sin(g); }}) {
        CHECK(std::fabs(expect1(f, r)) <= 1e-12);
    }
}

TEST_CASE("|g| error is nonincreasing as order doubles") {
    double prev = 1e9;
    for (int order = 16; order <= 256; order *= 2) {
        const QuadratureRule r = build_rule(order);
        const double err =
            std::fabs(expect1([](double g) { return std::fabs(g); }, r) - kSqrt2OverPi);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("half rule: positive nodes, unit mass, exact half-line moments") {
    for (int order : {1, 2, 16, 64, 128}) {
        const QuadratureRule h = build_half_rule(order);
        double mass = 0.0;
        for (int i = 0; i < h.order; ++i) {
            CHECK(h.nodes[i] > 0.0);
            CHECK(h.weights[i] > 0.0);
            mass += h.weights[i];
        }
        CHECK(std::fabs(mass - 1.0) <= 1e-13);
        if (order >= 2) {
            double m1 = 0.0, m2 = 0.0, m3 = 0.0;
            for (int i = 0; i < h.order; ++i) {
                m1 += h.weights[i] * h.nodes[i];
                m2 += h.weights[i] * h.nodes[i] * h.nodes[i];
                m3 += h.weights[i] * std::pow(h.nodes[i], 3);
            }
            CHECK(std::fabs(m1 - kSqrt2OverPi) <= 1e-13);       // E|G|
            CHECK(std::fabs(m2 - 1.0) <= 1e-12);                // E G^2
            CHECK(std::fabs(m3 - 2.0 * kSqrt2OverPi) <= 1e-12); // E|G|^3
        }
    }
    CHECK_THROWS_AS(build_half_rule(0), std::invalid_argument);
    CHECK_THROWS_AS(build_half_rule(129), std::invalid_argument);
}

TEST_CASE("reflected rule keeps the QuadratureRule invariants") {
    for (int order : {4, 64, 128, 256}) {
        const QuadratureRule r = build_reflected_rule(order);
        double mass = 0.0, var = 0.0;
        for (int i = 0; i < order; ++i) {
            CHECK(r.nodes[i] == -r.nodes[order - 1 - i]);
            CHECK(r.weights[i] >= 0.0);
            mass += r.weights[i];
            var += r.weights[i] * r.nodes[i] * r.nodes[i];
        }
        CHECK(std::fabs(mass - 1.0) <= 1e-12);
        CHECK(std::fabs(var - 1.0) <= 1e-10);
    }
    CHECK_THROWS_AS(build_reflected_rule(2), std::invalid_argument);
    CHECK_THROWS_AS(build_reflected_rule(65), std::invalid_argument);
    CHECK_THROWS_AS(build_reflected_rule(258), std::invalid_argument);
}

TEST_CASE("non-finite integrand raises NumericError") {
    const QuadratureRule r = build_rule(8);
    // log of a negative argument is NaN at every node
    CHECK_THROWS_AS(expect1([](double g) { return std::log(g - 100.0); }, r), NumericError);
    CHECK_THROWS_AS(expect3([](double g, double x, double v) { return g / (x * v * 0.0); }, r),
                    NumericError);
}
