#include "rank1am/constants.hpp"

#include <cmath>
#include <string>

namespace rank1am {

namespace {

constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi/2)

double fixed_point_lhs(double c, const QuadratureRule& rule) {
    return expect1([c](double g) { return g * g / (c + g * g); }, rule);
}

}  // namespace

ModelConstants solve_c(double lambda, const QuadratureRule& rule) {
    if (!(lambda > 1.0)) {
        throw std::domain_error("solve_c: lambda must exceed 1, got " + std::to_string(lambda));
    }
    const double target = 1.0 / lambda;

    // g(C) = E[G^2/(C+G^2)] decreases from ~1 at C=eps to <= 1/Lambda at
    // C=Lambda (since C(Lambda) <= Lambda); 200 bisections is plenty.
    double lo = 1e-12;
    double hi = lambda;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fixed_point_lhs(mid, rule) > target)
            lo = mid;
        else
            hi = mid;
    }

    ModelConstants mc;
    mc.lambda = lambda;
    mc.c_lambda = 0.5 * (lo + hi);
    mc.tau = 1.0 / mc.c_lambda;
    const double c = mc.c_lambda;
    mc.c2 = expect1([c](double w) {
        const double d = c + w * w;
        return w * w / (d * d);
    }, rule);
    mc.c3 = expect1([c](double w) {
        const double d = c + w * w;
        return w * w * w * w / (d * d);
    }, rule);
    return mc;
}

double phi(double x) {
    if (std::isnan(x)) throw std::invalid_argument("phi: NaN input");
    return kSqrtHalfPi * std::erf(x * M_SQRT1_2);  // erf(+-inf) = +-1
}

namespace {

double h12_impl(double x, const ModelConstants& mc, const QuadratureRule& rule, bool cubed) {
    if (x < 0.0) throw std::domain_error("h1/h2: x must be nonnegative");
    const double c = mc.c_lambda;
    // The |w| factor kills the w=0 node; guard it so phi(x*0) with x=inf
    // cannot produce 0*NaN.
    const double val = expect1([&](double w) {
        const double aw = std::fabs(w);
        if (aw == 0.0) return 0.0;
        const double d = c + w * w;
        const double num = cubed ? aw * aw * aw : aw;
        const double den = cubed ? d * d : d;
        return num * phi(x * aw) / den;
    }, rule);
    return cubed ? val / mc.c3 : mc.lambda * val;
}

}  // namespace

double h1(double x, const ModelConstants& mc, const QuadratureRule& rule) {
    return h12_impl(x, mc, rule, /*cubed=*/false);
}

double h2(double x, const ModelConstants& mc, const QuadratureRule& rule) {
    return h12_impl(x, mc, rule, /*cubed=*/true);
}

}  // namespace rank1am
