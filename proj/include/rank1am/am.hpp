#pragma once

#include <Eigen/Core>
#include <vector>

#include "rank1am/sampler.hpp"

namespace rank1am {

enum class SolveFor { mu, nu };

/// One weighted least-squares half-step, Cholesky-backed:
///   mu-half: (X^T W^2 X)^{ -1} X^T W y with W = diag(Z * fixed)
///   nu-half: same with the roles of X and Z swapped.
/// Throws SingularSystemError when the weighted Gram matrix has condition
/// estimate above 1e12.
Eigen::VectorXd wls_step(const Batch& batch, const Eigen::VectorXd& fixed, SolveFor solve_for);

/// Test oracle for coordinate k (0-based) of the mu-half: builds the
/// leave-one-column-out projector S = I - WX_k (X_k^T W^2 X_k)^{-1} X_k^T W
/// explicitly and evaluates <x^(k), W S y> / <x^(k), W S W x^(k)>.
/// O(n^2) memory; test scale only.
double per_coordinate_oracle(const Batch& batch, const Eigen::VectorXd& fixed, int k);

/// alpha = <estimate, truth>, beta = ||estimate - alpha * truth||.
StatePoint extract_state(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

/// Per-iteration record: empirical states for both halves, one-step
/// predictions conditioned on the previous *empirical* state, the
/// population prediction from the same state, and the squared ratios
/// (alpha = 0 recorded as +inf).
struct TrajectoryRow {
    StatePoint nu_state;
    StatePoint mu_state;
    Prediction nu_pred;
    Prediction mu_pred;
    Prediction nu_pop;
    Prediction mu_pop;
    double ratio_emp = 0.0;  // mu-half beta^2/alpha^2
    double ratio_det = 0.0;  // mu-half prediction ratio
};

struct Trajectory {
    StatePoint init_state;
    std::vector<TrajectoryRow> rows;  // length T
};

/// Runs T full AM iterations with fresh batches per half-step, recording
/// states and predictions. Solver failures carry (trial, iter, half)
/// context.
Trajectory run_trajectory(const ProblemConfig& config,
                          const std::pair<Eigen::VectorXd, Eigen::VectorXd>& truth,
                          const Eigen::VectorXd& mu0, const ModelConstants& mc,
                          const QuadratureRule& rule, std::uint64_t trial);

}  // namespace rank1am
