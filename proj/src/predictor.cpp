#include "rank1am/predictor.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rank1am {

namespace {

constexpr double kBetaSqSlack = 1e-12;

void require_nonzero(const StatePoint& s, const char* who) {
    if (s.norm_sq() <= 0.0) throw std::domain_error(std::string(who) + ": zero state");
}

double sign_conv(double x) { return x >= 0.0 ? 1.0 : -1.0; }  // sign(0) = 1

}  // namespace

NonlinearitySpec NonlinearitySpec::identity() {
    NonlinearitySpec s;
    s.kind = Kind::identity;
    s.bound_or_slope = 1.0;
    return s;
}

NonlinearitySpec NonlinearitySpec::sign() {
    NonlinearitySpec s;
    s.kind = Kind::sign;
    s.bound_or_slope = 1.0;
    return s;
}

NonlinearitySpec NonlinearitySpec::custom(std::function<double(double)> fn, double bound) {
    if (!fn) throw std::invalid_argument("NonlinearitySpec::custom: empty function");
    if (!(bound > 0.0)) throw std::invalid_argument("NonlinearitySpec::custom: bound must be > 0");
    for (int i = 0; i <= 200; ++i) {
        const double x = -20.0 + 0.2 * i;
        const double v = fn(x);
        if (!std::isfinite(v) || std::fabs(v) > bound) {
            throw std::invalid_argument("NonlinearitySpec::custom: |psi(" + std::to_string(x) +
                                        ")| exceeds bound " + std::to_string(bound));
        }
    }
    NonlinearitySpec s;
    s.kind = Kind::custom;
    s.custom_fn = std::move(fn);
    s.bound_or_slope = bound;
    return s;
}

double NonlinearitySpec::apply(double x) const {
    switch (kind) {
        case Kind::identity: return x;
        case Kind::sign: return sign_conv(x);
        case Kind::custom: return custom_fn(x);
    }
    return x;
}

namespace {

// Tensor-grid axes for the 3D expectations. Reflected half-range axes keep
// kinked links (sign) spectrally accurate; the cache makes repeated
// predictions cheap. Thread-local, so predictions stay safely parallel.
const QuadratureRule& tensor_axes(int order) {
    const int even = std::max(4, order + (order & 1));
    thread_local int cached_order = -1;
    thread_local QuadratureRule cached;
    if (cached_order != even) {
        cached = build_reflected_rule(std::min(even, 256));
        cached_order = even;
    }
    return cached;
}

// The five expectations of the one-step update, evaluated on one tensor
// grid over (U, U', X) where U = <z, nu*>/s carries psi's argument and the
// weight variable is G = ca*U + cb*U'. This is the same law as the spec's
// (G, X, V) parameterization, but any discontinuity of psi lies along the
// grid axes u = 0 / x = 0 instead of cutting the grid diagonally. The
// X-sums factor out of the tensor sum, so psi is evaluated m^2 times.
struct GeneralMoments {
    double e_g2_w1 = 0.0;  // E[G^2/(1+tau G^2)]
    double e_g2_w2 = 0.0;  // E[G^2/(1+tau G^2)^2]
    double e_g4_w2 = 0.0;  // E[G^4/(1+tau G^2)^2]
    double e_gxy = 0.0;    // E[GXY/(1+tau G^2)]
    double e_g3xy = 0.0;   // E[G^3XY/(1+tau G^2)^2]
    double e_g2y2 = 0.0;   // E[G^2Y^2/(1+tau G^2)^2]
    double e_gxy_raw = 0.0;  // E[GXY] (population update)
};

GeneralMoments general_moments(double ca, double cb, const NonlinearitySpec& psi, double tau,
                               const QuadratureRule& ax) {
    const int m = ax.order;
    const double* node = ax.nodes.data();
    const double* wt = ax.weights.data();

    // Per-u-node X-marginals: a_i = E_X[X psi(u_i X)], b_i = E_X[psi(u_i X)^2].
    std::vector<double> a(m), b(m);
    for (int i = 0; i < m; ++i) {
        double sa = 0.0, sb = 0.0;
        for (int k = 0; k < m; ++k) {
            const double y = psi.apply(node[i] * node[k]);
            if (!std::isfinite(y)) {
                throw NumericError("predict_general: psi non-finite at " +
                                   std::to_string(node[i] * node[k]));
            }
            sa += wt[k] * node[k] * y;
            sb += wt[k] * y * y;
        }
        a[i] = sa;
        b[i] = sb;
    }

    GeneralMoments mom;
    for (int i = 0; i < m; ++i) {
        const double u = node[i];
        for (int j = 0; j < m; ++j) {
            const double g = ca * u + cb * node[j];
            const double g2 = g * g;
            const double w1 = 1.0 / (1.0 + tau * g2);
            const double w2 = w1 * w1;
            const double wij = wt[i] * wt[j];
            mom.e_g2_w1 += wij * g2 * w1;
            mom.e_g2_w2 += wij * g2 * w2;
            mom.e_g4_w2 += wij * g2 * g2 * w2;
            mom.e_gxy += wij * g * w1 * a[i];
            mom.e_g3xy += wij * g2 * g * w2 * a[i];
            mom.e_g2y2 += wij * g2 * w2 * b[i];
            mom.e_gxy_raw += wij * g * a[i];
        }
    }
    return mom;
}

}  // namespace

Prediction predict_general(const StatePoint& prev, const NonlinearitySpec& psi, double sigma,
                           const ModelConstants& mc, const QuadratureRule& rule) {
    require_nonzero(prev, "predict_general");
    if (sigma < 0.0) throw std::domain_error("predict_general: sigma must be >= 0");

    const double s = std::sqrt(prev.norm_sq());
    const GeneralMoments mom =
        general_moments(prev.alpha / s, prev.beta / s, psi, mc.tau, tensor_axes(rule.order));

    const double denom1 = mom.e_g2_w1;
    const double denom2 = mc.c_lambda * mom.e_g2_w2;

    Prediction out;
    out.alpha_det = mom.e_gxy / (s * denom1);
    out.beta_det_sq = (mom.e_g2y2 + sigma * sigma * mom.e_g2_w2) / (s * s * denom2) -
                      2.0 * out.alpha_det * mom.e_g3xy / (s * denom2) +
                      out.alpha_det * out.alpha_det * mom.e_g4_w2 / denom2;

    if (!std::isfinite(out.alpha_det) || !std::isfinite(out.beta_det_sq)) {
        throw NumericError("predict_general: non-finite prediction");
    }
    if (out.beta_det_sq < 0.0) {
        if (out.beta_det_sq < -kBetaSqSlack) {
            throw NumericError("predict_general: (beta_det)^2 = " +
                               std::to_string(out.beta_det_sq) + " below numerical slack");
        }
        out.beta_det_sq = 0.0;
    }
    return out;
}

double f_id(const StatePoint& s) {
    require_nonzero(s, "f_id");
    return s.alpha / s.norm_sq();
}

double g_id(const StatePoint& s, double sigma, const ModelConstants& mc) {
    require_nonzero(s, "g_id");
    const double n2 = s.norm_sq();
    const double s2 = sigma * sigma;
    return ((1.0 + s2) * s.beta * s.beta + s2 * s.alpha * s.alpha) / (mc.c_lambda * n2 * n2);
}

namespace {

// alpha/beta with the beta = 0 half-step mapped to +-inf; phi saturates
// there, which is the exact limit.
double slope_ratio(double alpha, double beta) {
    if (beta == 0.0) return alpha >= 0.0 ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
    return alpha / beta;
}

}  // namespace

double f_sgn(const StatePoint& s, const ModelConstants& mc, const QuadratureRule& rule) {
    require_nonzero(s, "f_sgn");
    const double r = slope_ratio(s.alpha, s.beta);
    const double mag = h1(std::fabs(r), mc, rule);  // = Lambda E[|W|phi(|r||W|)/(C+W^2)]
    return (2.0 / M_PI) * sign_conv(r) * mag / std::sqrt(s.norm_sq());
}

double g_sgn(const StatePoint& s, double sigma, const ModelConstants& mc,
             const QuadratureRule& rule) {
    require_nonzero(s, "g_sgn");
    const double n2 = s.norm_sq();
    const double r = std::fabs(slope_ratio(s.alpha, s.beta));  // even in alpha
    const double c = mc.c_lambda;
    const double fpos = (2.0 / M_PI) * h1(r, mc, rule) / std::sqrt(n2);
    // E[|W|^3 phi(r|W|)/(C+W^2)^2] = c3 * h2(r)
    const double e_w3phi = mc.c3 * h2(r, mc, rule);
    double out = (1.0 + sigma * sigma) / (c * n2) + fpos * fpos * mc.c3 / (c * mc.c2) -
                 (4.0 / M_PI) * fpos * e_w3phi / (c * mc.c2 * std::sqrt(n2));
    if (out < 0.0 && out > -kBetaSqSlack) out = 0.0;
    return out;
}

Prediction predict_one(const StatePoint& prev, const NonlinearitySpec& psi, double sigma,
                       const ModelConstants& mc, const QuadratureRule& rule) {
    switch (psi.kind) {
        case NonlinearitySpec::Kind::identity:
            return Prediction{f_id(prev), g_id(prev, sigma, mc)};
        case NonlinearitySpec::Kind::sign:
            return Prediction{f_sgn(prev, mc, rule), g_sgn(prev, sigma, mc, rule)};
        case NonlinearitySpec::Kind::custom:
            return predict_general(prev, psi, sigma, mc, rule);
    }
    return predict_general(prev, psi, sigma, mc, rule);
}

double h(double x, NonlinearitySpec::Kind model, double sigma, const ModelConstants& mc,
         const QuadratureRule& rule) {
    if (x < 0.0) throw std::domain_error("h: x must be nonnegative");
    const double s2 = sigma * sigma;
    const double c = mc.c_lambda;
    if (model == NonlinearitySpec::Kind::identity) {
        return (1.0 + s2) / c * x + s2 / c;
    }
    if (model != NonlinearitySpec::Kind::sign) {
        throw std::domain_error("h: ratio maps exist for identity and sign only");
    }
    const double inv_sqrt_x = x == 0.0 ? std::numeric_limits<double>::infinity()
                                       : 1.0 / std::sqrt(x);
    const double h1v = h1(inv_sqrt_x, mc, rule);
    const double h2v = h2(inv_sqrt_x, mc, rule);
    return (M_PI * M_PI / 4.0) * (1.0 + s2) / c / (h1v * h1v) +
           mc.c3 / (c * mc.c2) * (1.0 - 2.0 * h2v / h1v);
}

std::vector<DetStep> det_trajectory(const StatePoint& init, const NonlinearitySpec& psi,
                                    double sigma, const ModelConstants& mc,
                                    const QuadratureRule& rule, int iterations) {
    if (iterations < 1) throw std::invalid_argument("det_trajectory: iterations must be >= 1");
    require_nonzero(init, "det_trajectory");

    std::vector<DetStep> out;
    out.reserve(iterations);
    StatePoint state = init;
    for (int t = 0; t < iterations; ++t) {
        DetStep step;
        step.nu_half = predict_one(state, psi, sigma, mc, rule);
        const StatePoint nu_state{step.nu_half.alpha_det, std::sqrt(step.nu_half.beta_det_sq)};
        step.mu_half = predict_one(nu_state, psi, sigma, mc, rule);
        state = StatePoint{step.mu_half.alpha_det, std::sqrt(step.mu_half.beta_det_sq)};
        out.push_back(step);
    }
    return out;
}

Prediction population_step(const StatePoint& prev, const NonlinearitySpec& psi,
                           const QuadratureRule& rule) {
    require_nonzero(prev, "population_step");
    const double s = std::sqrt(prev.norm_sq());
    const GeneralMoments mom =
        general_moments(prev.alpha / s, prev.beta / s, psi, /*tau=*/0.0, tensor_axes(rule.order));
    return Prediction{mom.e_gxy_raw / s, 0.0};
}

}  // namespace rank1am
