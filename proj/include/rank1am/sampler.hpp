#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "rank1am/predictor.hpp"

namespace rank1am {

enum class HalfStep { nu = 0, mu = 1 };

/// Initialization mode: a uniform draw from the unit ball, or an explicit
/// (alpha0, beta0) placed as alpha0*e1 + beta0*e2.
struct InitSpec {
    enum class Mode { random_unit_ball, explicit_state };
    Mode mode = Mode::random_unit_ball;
    double alpha0 = 0.0;
    double beta0 = 0.0;

    static InitSpec random_ball() { return InitSpec{}; }
    static InitSpec explicit_state_of(double a0, double b0) {
        return InitSpec{Mode::explicit_state, a0, b0};
    }
};

struct ProblemConfig {
    int d = 0;
    double lambda = 0.0;
    int n = 0;  // per-substep sample size, round(lambda * d)
    double sigma = 0.0;
    NonlinearitySpec psi = NonlinearitySpec::identity();
    int iterations = 1;
    std::uint64_t master_seed = 0;
    InitSpec init;

    static ProblemConfig make(int d, double lambda, double sigma, NonlinearitySpec psi,
                              int iterations, std::uint64_t master_seed,
                              InitSpec init = InitSpec::random_ball());
    void validate() const;
};

/// One fresh block of observations: sensing rows, weights-side rows, and
/// noisy responses y_i = psi(<x_i, mu*> <z_i, nu*>) + eps_i.
struct Batch {
    Eigen::MatrixXd x_rows;  // n x d
    Eigen::MatrixXd z_rows;  // n x d
    Eigen::VectorXd y;       // n
    Eigen::VectorXd eps;     // n, stored so the construction stays checkable
};

/// Stateless counter stream: every value is a pure function of the key and
/// the draw index, so any (trial, iter, half) coordinate replays bit-exactly
/// regardless of scheduling.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64();
    double next_uniform();       // in (0, 1)
    double next_normal();        // Box-Muller on the counter stream
    void fill_normal(double* dst, std::ptrdiff_t count);

  private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

/// Derives the stream key for a (master_seed, trial, iter, half, stream)
/// coordinate by iterated 64-bit mixing.
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t iter,
                         HalfStep half, std::uint64_t stream = 0);

/// Ground truth pinned to the first basis vector (WLOG under rotation
/// invariance of the Gaussian design).
std::pair<Eigen::VectorXd, Eigen::VectorXd> make_truth(const ProblemConfig& config);

/// mu0 uniform on the unit ball (the ball draw is kept as-is; no projection
/// to the sphere), or the explicit alpha0*e1 + beta0*e2 state.
Eigen::VectorXd random_init(const ProblemConfig& config, std::uint64_t trial);

/// n fresh rows of i.i.d. N(0,1) entries plus noise N(0, sigma^2); a pure
/// function of (master_seed, trial, iter, half).
Batch draw_batch(const ProblemConfig& config,
                 const std::pair<Eigen::VectorXd, Eigen::VectorXd>& truth, std::uint64_t trial,
                 std::uint64_t iter, HalfStep half);

/// Applies a seeded random orthogonal rotation to both truth vectors; used
/// by the --rotate-truth debug path to verify rotational invariance.
std::pair<Eigen::VectorXd, Eigen::VectorXd> rotate_truth(
    const std::pair<Eigen::VectorXd, Eigen::VectorXd>& truth, std::uint64_t seed);

}  // namespace rank1am
