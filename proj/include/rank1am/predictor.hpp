#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rank1am/constants.hpp"
#include "rank1am/quad.hpp"

namespace rank1am {

/// One half-step's two-dimensional state: alpha is the component parallel
/// to the ground truth, beta >= 0 the norm of the orthogonal part.
struct StatePoint {
    double alpha = 0.0;
    double beta = 0.0;
    double norm_sq() const { return alpha * alpha + beta * beta; }
    double ratio_sq() const { return beta * beta / (alpha * alpha); }
};

/// Link function applied to the bilinear measurements. Custom functions
/// must be bounded by bound_or_slope (spot-checked on [-20, 20]); identity
/// and sign carry the convention sign(0) = 1.
struct NonlinearitySpec {
    enum class Kind { identity, sign, custom };

    Kind kind = Kind::identity;
    std::function<double(double)> custom_fn;
    double bound_or_slope = 1.0;

    static NonlinearitySpec identity();
    static NonlinearitySpec sign();
    static NonlinearitySpec custom(std::function<double(double)> fn, double bound);

    double apply(double x) const;
};

/// Deterministic one-step prediction: the parallel component and the
/// *square* of the orthogonal one.
struct Prediction {
    double alpha_det = 0.0;
    double beta_det_sq = 0.0;
    double ratio_sq() const { return beta_det_sq / (alpha_det * alpha_det); }
};

/// General one-step prediction, valid for any bounded-or-linear psi: all
/// Gaussian expectations evaluated by tensor quadrature with
/// Y = psi(alpha/s * GX + beta/s * VX), s^2 = alpha^2 + beta^2.
Prediction predict_general(const StatePoint& prev, const NonlinearitySpec& psi, double sigma,
                           const ModelConstants& mc, const QuadratureRule& rule);

/// Closed forms for the identity model.
double f_id(const StatePoint& s);
double g_id(const StatePoint& s, double sigma, const ModelConstants& mc);

/// Closed forms for the sign model; the remaining 1D expectation over W is
/// evaluated by quadrature. beta = 0 is handled via the phi(inf) limit, and
/// f_sgn is odd in alpha.
double f_sgn(const StatePoint& s, const ModelConstants& mc, const QuadratureRule& rule);
double g_sgn(const StatePoint& s, double sigma, const ModelConstants& mc,
             const QuadratureRule& rule);

/// One-step prediction dispatch: closed forms for identity/sign, the
/// general quadrature path for custom psi.
Prediction predict_one(const StatePoint& prev, const NonlinearitySpec& psi, double sigma,
                       const ModelConstants& mc, const QuadratureRule& rule);

/// Scalar update maps for the squared ratio x = beta^2/alpha^2; one AM
/// half-step maps x to h(x) and a full iteration to h(h(x)).
///   h_id(x)  = (1+sigma^2)/C * x + sigma^2/C
///   h_sgn(x) = pi^2/4 (1+sigma^2)/C / h1(1/sqrt x)^2
///            + C3/(C C2) (1 - 2 h2(1/sqrt x)/h1(1/sqrt x))
double h(double x, NonlinearitySpec::Kind model, double sigma, const ModelConstants& mc,
         const QuadratureRule& rule);

/// Pure deterministic trajectory: nu-half then mu-half per iteration,
/// starting from the mu-state `init`.
struct DetStep {
    Prediction nu_half;
    Prediction mu_half;
};
std::vector<DetStep> det_trajectory(const StatePoint& init, const NonlinearitySpec& psi,
                                    double sigma, const ModelConstants& mc,
                                    const QuadratureRule& rule, int iterations);

/// Population (infinite-sample) update: exactly parallel to the truth,
/// alpha = E[GXY]/s and beta identically 0.
Prediction population_step(const StatePoint& prev, const NonlinearitySpec& psi,
                           const QuadratureRule& rule);

}  // namespace rank1am
