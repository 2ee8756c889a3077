#include "rank1am/quad.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace rank1am {

QuadratureRule build_rule(int order) {
    if (order < 2 || order > 512) {
        throw std::invalid_argument("build_rule: order must be in [2, 512], got " +
                                    std::to_string(order));
    }

    // Probabilists' Hermite three-term recurrence He_{k+1} = x He_k - k He_{k-1}
    // gives a Jacobi matrix with zero diagonal and off-diagonal sqrt(k).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = std::sqrt(static_cast<double>(k));
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) {
        throw NumericError("build_rule: Jacobi eigenproblem failed at order " +
                           std::to_string(order));
    }

    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);  // ascending
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;  // total mass 1 in probabilists' normalization
    }

    // Enforce exact symmetry so odd integrands cancel to the last bit.
    for (int i = 0, j = order - 1; i < j; ++i, --j) {
        const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -node;
        rule.nodes[j] = node;
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;

    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    for (double& w : rule.weights) w /= wsum;
    return rule;
}

namespace {

// Gauss-Legendre on [-1, 1]; recurrence b_k = k/sqrt(4k^2-1), weights sum 2.
void legendre_rule(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    nodes.resize(m);
    weights.resize(m);
    for (int i = 0; i < m; ++i) {
        nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        weights[i] = 2.0 * v0 * v0;
    }
}

}  // namespace

QuadratureRule build_half_rule(int order) {
    if (order < 1 || order > 128) {
        throw std::invalid_argument("build_half_rule: order must be in [1, 128], got " +
                                    std::to_string(order));
    }

    // Discrete stand-in for the measure e^{-t^2/2} dt on [0, T]: per panel,
    // Gauss-Legendre exact for polynomials up to degree 2*ppp-1 >= 2*order+15,
    // which covers every inner product the Stieltjes recursion needs.
    const double upper = std::max(26.0, std::sqrt(4.0 * order) + 9.0);
    const int panels = static_cast<int>(std::ceil(upper / 1.6));
    const int ppp = std::max(order + 8, 40);
    std::vector<double> gl_nodes, gl_weights;
    legendre_rule(ppp, gl_nodes, gl_weights);

    std::vector<double> t, w;
    t.reserve(static_cast<std::size_t>(panels) * ppp);
    w.reserve(static_cast<std::size_t>(panels) * ppp);
    for (int p = 0; p < panels; ++p) {
        const double a = upper * p / panels;
        const double b = upper * (p + 1) / panels;
        const double mid = 0.5 * (a + b), hl = 0.5 * (b - a);
        for (int i = 0; i < ppp; ++i) {
            const double ti = mid + hl * gl_nodes[i];
            t.push_back(ti);
            w.push_back(hl * gl_weights[i] * std::exp(-0.5 * ti * ti));
        }
    }
    const std::size_t m = t.size();

    // Stieltjes recursion on orthonormal polynomials (pointwise values) to
    // keep intermediates in range.
    std::vector<double> alpha(order), beta(order, 0.0);
    std::vector<double> q_prev(m, 0.0), q_cur(m), q_next(m);
    double mu0 = 0.0;
    for (std::size_t i = 0; i < m; ++i) mu0 += w[i];
    const double inv_sqrt_mu0 = 1.0 / std::sqrt(mu0);
    for (std::size_t i = 0; i < m; ++i) q_cur[i] = inv_sqrt_mu0;
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += w[i] * t[i] * q_cur[i] * q_cur[i];
    alpha[0] = acc;
    double sb_prev = 0.0;
    for (int k = 1; k < order; ++k) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            q_next[i] = (t[i] - alpha[k - 1]) * q_cur[i] - sb_prev * q_prev[i];
            nrm += w[i] * q_next[i] * q_next[i];
        }
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            throw NumericError("build_half_rule: Stieltjes recursion degenerated at step " +
                               std::to_string(k));
        }
        const double sb = std::sqrt(nrm);
        double at = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            q_next[i] /= sb;
            at += w[i] * t[i] * q_next[i] * q_next[i];
        }
        beta[k] = sb;
        alpha[k] = at;
        q_prev.swap(q_cur);
        q_cur.swap(q_next);
        sb_prev = sb;
    }

    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 0; k < order; ++k) {
        jacobi(k, k) = alpha[k];
        if (k > 0) {
            jacobi(k, k - 1) = beta[k];
            jacobi(k - 1, k) = beta[k];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) {
        throw NumericError("build_half_rule: Jacobi eigenproblem failed at order " +
                           std::to_string(order));
    }

    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    double wsum = 0.0;
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
        wsum += rule.weights[i];
    }
    for (double& wi : rule.weights) wi /= wsum;
    return rule;
}

QuadratureRule build_reflected_rule(int order) {
    if (order < 4 || order > 256 || order % 2 != 0) {
        throw std::invalid_argument("build_reflected_rule: order must be even in [4, 256], got " +
                                    std::to_string(order));
    }
    const QuadratureRule half = build_half_rule(order / 2);
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order / 2; ++i) {
        rule.nodes[order / 2 + i] = half.nodes[i];
        rule.nodes[order / 2 - 1 - i] = -half.nodes[i];
        rule.weights[order / 2 + i] = 0.5 * half.weights[i];
        rule.weights[order / 2 - 1 - i] = 0.5 * half.weights[i];
    }
    return rule;
}

namespace {

[[noreturn]] void throw_nonfinite(double g, double x, double v, int dims) {
    std::string msg = "expect" + std::to_string(dims) + ": non-finite integrand at node (" +
                      std::to_string(g);
    if (dims >= 2) msg += ", " + std::to_string(x);
    if (dims >= 3) msg += ", " + std::to_string(v);
    msg += ")";
    throw NumericError(msg);
}

}  // namespace

double expect1(const std::function<double(double)>& f, const QuadratureRule& rule) {
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        const double fi = f(rule.nodes[i]);
        if (!std::isfinite(fi)) throw_nonfinite(rule.nodes[i], 0, 0, 1);
        acc += rule.weights[i] * fi;
    }
    return acc;
}

double expect2(const std::function<double(double, double)>& f, const QuadratureRule& rule) {
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        double inner = 0.0;
        for (int j = 0; j < rule.order; ++j) {
            const double fij = f(rule.nodes[i], rule.nodes[j]);
            if (!std::isfinite(fij)) throw_nonfinite(rule.nodes[i], rule.nodes[j], 0, 2);
            inner += rule.weights[j] * fij;
        }
        acc += rule.weights[i] * inner;
    }
    return acc;
}

double expect3(const std::function<double(double, double, double)>& f,
               const QuadratureRule& rule) {
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        double mid = 0.0;
        for (int j = 0; j < rule.order; ++j) {
            double inner = 0.0;
            for (int k = 0; k < rule.order; ++k) {
                const double fv = f(rule.nodes[i], rule.nodes[j], rule.nodes[k]);
                if (!std::isfinite(fv))
                    throw_nonfinite(rule.nodes[i], rule.nodes[j], rule.nodes[k], 3);
                inner += rule.weights[k] * fv;
            }
            mid += rule.weights[j] * inner;
        }
        acc += rule.weights[i] * mid;
    }
    return acc;
}

}  // namespace rank1am
