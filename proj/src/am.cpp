#include "rank1am/am.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

namespace rank1am {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::VectorXd solve_weighted(const Eigen::MatrixXd& design, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& y, const char* context) {
    // B = diag(w) * design; solve (B^T B) beta = B^T y.
    const Eigen::MatrixXd b = w.asDiagonal() * design;
    const auto d = design.cols();
    Eigen::MatrixXd gram(d, d);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(b.adjoint());
    gram = gram.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd rhs = b.adjoint() * y;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
        if (llt.rcond() < 1.0 / kMaxCondition) {
            throw SingularSystemError(std::string("wls_step: ill-conditioned Gram matrix at ") +
                                      context);
        }
        return llt.solve(rhs);
    }
    // SPD factorization can fail on near-singular weights; fall back to a
    // symmetric-indefinite decomposition before giving up.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1.0 / kMaxCondition) {
        throw SingularSystemError(std::string("wls_step: singular Gram matrix at ") + context);
    }
    return ldlt.solve(rhs);
}

}  // namespace

Eigen::VectorXd wls_step(const Batch& batch, const Eigen::VectorXd& fixed, SolveFor solve_for) {
    if (solve_for == SolveFor::mu) {
        const Eigen::VectorXd w = batch.z_rows * fixed;
        return solve_weighted(batch.x_rows, w, batch.y, "mu-half");
    }
    const Eigen::VectorXd w = batch.x_rows * fixed;
    return solve_weighted(batch.z_rows, w, batch.y, "nu-half");
}

double per_coordinate_oracle(const Batch& batch, const Eigen::VectorXd& fixed, int k) {
    const auto n = batch.x_rows.rows();
    const auto d = batch.x_rows.cols();
    if (k < 0 || k >= d) throw std::invalid_argument("per_coordinate_oracle: bad coordinate");

    const Eigen::VectorXd w = batch.z_rows * fixed;
    Eigen::MatrixXd x_rest(n, d - 1);
    x_rest.leftCols(k) = batch.x_rows.leftCols(k);
    x_rest.rightCols(d - 1 - k) = batch.x_rows.rightCols(d - 1 - k);

    const Eigen::MatrixXd wx = w.asDiagonal() * x_rest;
    const Eigen::MatrixXd inner = x_rest.transpose() * w.asDiagonal() * wx;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(inner);
    if (ldlt.info() != Eigen::Success) {
        throw SingularSystemError("per_coordinate_oracle: singular inner Gram matrix");
    }
    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(n, n) - wx * ldlt.solve(wx.transpose());

    const Eigen::VectorXd xk = batch.x_rows.col(k);
    const Eigen::VectorXd wxk = w.cwiseProduct(xk);
    const double num = wxk.dot(proj * batch.y);
    const double den = wxk.dot(proj * wxk);
    return num / den;
}

StatePoint extract_state(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    StatePoint s;
    s.alpha = estimate.dot(truth);
    s.beta = (estimate - s.alpha * truth).norm();
    return s;
}

namespace {

double ratio_or_inf(double alpha, double beta_sq) {
    if (alpha == 0.0) return std::numeric_limits<double>::infinity();
    return beta_sq / (alpha * alpha);
}

}  // namespace

Trajectory run_trajectory(const ProblemConfig& config,
                          const std::pair<Eigen::VectorXd, Eigen::VectorXd>& truth,
                          const Eigen::VectorXd& mu0, const ModelConstants& mc,
                          const QuadratureRule& rule, std::uint64_t trial) {
    if (mu0.squaredNorm() <= 0.0) throw std::invalid_argument("run_trajectory: zero mu0");

    Trajectory traj;
    traj.init_state = extract_state(mu0, truth.first);
    traj.rows.reserve(config.iterations);

    Eigen::VectorXd mu = mu0;
    StatePoint mu_state = traj.init_state;
    for (int t = 0; t < config.iterations; ++t) {
        TrajectoryRow row;
        try {
            const Batch bn = draw_batch(config, truth, trial, t, HalfStep::nu);
            const Eigen::VectorXd nu = wls_step(bn, mu, SolveFor::nu);
            row.nu_state = extract_state(nu, truth.second);
            row.nu_pred = predict_one(mu_state, config.psi, config.sigma, mc, rule);
            row.nu_pop = population_step(mu_state, config.psi, rule);

            const Batch bm = draw_batch(config, truth, trial, t, HalfStep::mu);
            mu = wls_step(bm, nu, SolveFor::mu);
            row.mu_state = extract_state(mu, truth.first);
            row.mu_pred = predict_one(row.nu_state, config.psi, config.sigma, mc, rule);
            row.mu_pop = population_step(row.nu_state, config.psi, rule);
        } catch (const SingularSystemError& e) {
            throw SingularSystemError(std::string(e.what()) + " (trial " +
                                      std::to_string(trial) + ", iter " + std::to_string(t) +
                                      ")");
        }
        row.ratio_emp = ratio_or_inf(row.mu_state.alpha, row.mu_state.beta * row.mu_state.beta);
        row.ratio_det = ratio_or_inf(row.mu_pred.alpha_det, row.mu_pred.beta_det_sq);
        mu_state = row.mu_state;
        traj.rows.push_back(row);
    }
    return traj;
}

}  // namespace rank1am
