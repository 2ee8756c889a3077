#pragma once

#include <functional>
#include <vector>

#include "rank1am/errors.hpp"

namespace rank1am {

/// Gauss–Hermite rule in probabilists' normalization: nodes live on the
/// standard-normal scale and weights sum to 1, so sums of w_i * f(node_i)
/// approximate E[f(G)] for G ~ N(0,1) directly (exact for polynomials of
/// degree <= 2*order - 1).
struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;    // sorted ascending, symmetric about 0
    std::vector<double> weights;  // nonnegative, sum to 1
};

// Default tensor-grid orders. Non-polynomial integrands (sign, |.|)
// converge algebraically, so the 1D default is generous.
inline constexpr int kDefaultOrder1d = 128;
inline constexpr int kDefaultOrder2d = 96;
inline constexpr int kDefaultOrder3d = 64;

/// Builds an order-point rule via Golub–Welsch on the Jacobi matrix of the
/// probabilists' Hermite recurrence. Valid for 2 <= order <= 512.
QuadratureRule build_rule(int order);

/// Gauss rule for the half-normal density 2*phi(t) on [0, inf): nodes all
/// positive, weights sum to 1, exact for polynomials in t of degree
/// <= 2*order - 1. The recurrence has no closed form, so the Jacobi matrix
/// is built by a Stieltjes pass over a composite Gauss-Legendre
/// discretization of the weight before the usual Golub-Welsch step.
/// Valid for 1 <= order <= 128.
QuadratureRule build_half_rule(int order);

/// Symmetric full-line rule obtained by reflecting the order/2-point half
/// rule. Satisfies the QuadratureRule invariants and, unlike build_rule,
/// stays spectrally accurate for integrands whose even part has a kink at
/// the origin (|g|, saturated phi, sign products). Polynomial exactness
/// degree is order - 1. Requires an even order in [2, 256].
QuadratureRule build_reflected_rule(int order);

/// E[f(G)], E[f(G,X)], E[f(G,X,V)] over independent standard Gaussians by
/// (tensor-product) quadrature. Throws NumericError if f is non-finite at
/// any node tuple.
double expect1(const std::function<double(double)>& f, const QuadratureRule& rule);
double expect2(const std::function<double(double, double)>& f, const QuadratureRule& rule);
double expect3(const std::function<double(double, double, double)>& f,
               const QuadratureRule& rule);

}  // namespace rank1am
