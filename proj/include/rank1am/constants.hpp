#pragma once

#include "rank1am/quad.hpp"

namespace rank1am {

/// Scalar constants attached to one oversampling ratio. c_lambda solves
/// 1/lambda = E[G^2 / (c_lambda + G^2)] and the rest are derived from it:
/// tau = 1/c_lambda, c2 = E[W^2/(c+W^2)^2], c3 = E[W^4/(c+W^2)^2].
struct ModelConstants {
    double lambda = 0.0;
    double c_lambda = 0.0;
    double tau = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

/// Solves the fixed point by bisection on [1e-12, lambda]; the map
/// C -> E[G^2/(C+G^2)] is strictly decreasing so the bracket is guaranteed.
/// Requires lambda > 1 (at lambda = 1 the solution degenerates to C = 0).
ModelConstants solve_c(double lambda, const QuadratureRule& rule);

/// phi(x) = int_0^x exp(-t^2/2) dt = sqrt(pi/2) * erf(x / sqrt 2).
/// Odd, increasing, saturates at +-sqrt(pi/2); accepts +-inf.
double phi(double x);

/// h1(x) = lambda * E[|W| phi(x|W|) / (c + W^2)]
/// h2(x) = (1/c3)  * E[|W|^3 phi(x|W|) / (c + W^2)^2]
/// Both nonnegative and nondecreasing on x >= 0 (x = +inf allowed).
double h1(double x, const ModelConstants& mc, const QuadratureRule& rule);
double h2(double x, const ModelConstants& mc, const QuadratureRule& rule);

}  // namespace rank1am
