#include "rank1am/sampler.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace rank1am {

namespace {

// splitmix64 increment and finalizer (Steele/Lea/Flood; Vigna's constants).
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
    return mix64(h + kGolden + v);
}

}  // namespace

std::uint64_t CounterRng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double CounterRng::next_uniform() {
    // Midpoint of the 53-bit lattice: strictly inside (0, 1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    return r * std::cos(t);
}

void CounterRng::fill_normal(double* dst, std::ptrdiff_t count) {
    for (std::ptrdiff_t i = 0; i < count; ++i) dst[i] = next_normal();
}

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t iter,
                         HalfStep half, std::uint64_t stream) {
    std::uint64_t h = mix64(master_seed + kGolden);
    h = absorb(h, trial);
    h = absorb(h, iter);
    h = absorb(h, static_cast<std::uint64_t>(half));
    h = absorb(h, stream);
    return h;
}

ProblemConfig ProblemConfig::make(int d, double lambda, double sigma, NonlinearitySpec psi,
                                  int iterations, std::uint64_t master_seed, InitSpec init) {
    ProblemConfig cfg;
    cfg.d = d;
    cfg.lambda = lambda;
    cfg.n = static_cast<int>(std::llround(lambda * d));
    cfg.sigma = sigma;
    cfg.psi = std::move(psi);
    cfg.iterations = iterations;
    cfg.master_seed = master_seed;
    cfg.init = init;
    cfg.validate();
    return cfg;
}

void ProblemConfig::validate() const {
    if (d < 2) throw std::invalid_argument("ProblemConfig: d must be >= 2");
    if (n <= d) throw std::invalid_argument("ProblemConfig: need n > d (lambda > 1)");
    if (sigma < 0.0) throw std::invalid_argument("ProblemConfig: sigma must be >= 0");
    if (iterations < 1) throw std::invalid_argument("ProblemConfig: iterations must be >= 1");
    if (init.mode == InitSpec::Mode::explicit_state &&
        init.alpha0 * init.alpha0 + init.beta0 * init.beta0 <= 0.0) {
        throw std::invalid_argument("ProblemConfig: explicit init must be nonzero");
    }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> make_truth(const ProblemConfig& config) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(config.d);
    e1(0) = 1.0;
    return {e1, e1};
}

namespace {

// Stream tags keep init/batch/rotation draws on disjoint streams.
constexpr std::uint64_t kStreamBatch = 0;
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamRotate = 2;

}  // namespace

Eigen::VectorXd random_init(const ProblemConfig& config, std::uint64_t trial) {
    if (config.init.mode == InitSpec::Mode::explicit_state) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(config.d);
        v(0) = config.init.alpha0;
        v(1) = config.init.beta0;
        return v;
    }
    CounterRng rng(stream_key(config.master_seed, trial, 0, HalfStep::nu, kStreamInit));
    Eigen::VectorXd v(config.d);
    rng.fill_normal(v.data(), config.d);
    const double radius = std::pow(rng.next_uniform(), 1.0 / config.d);
    return v * (radius / v.norm());
}

Batch draw_batch(const ProblemConfig& config,
                 const std::pair<Eigen::VectorXd, Eigen::VectorXd>& truth, std::uint64_t trial,
                 std::uint64_t iter, HalfStep half) {
    const int n = config.n;
    const int d = config.d;
    CounterRng rng(stream_key(config.master_seed, trial, iter, half, kStreamBatch));

    Batch b;
    b.x_rows.resize(n, d);
    b.z_rows.resize(n, d);
    rng.fill_normal(b.x_rows.data(), static_cast<std::ptrdiff_t>(n) * d);
    rng.fill_normal(b.z_rows.data(), static_cast<std::ptrdiff_t>(n) * d);
    b.eps.resize(n);
    if (config.sigma > 0.0) {
        rng.fill_normal(b.eps.data(), n);
        b.eps *= config.sigma;
    } else {
        b.eps.setZero();
    }

    const Eigen::VectorXd xm = b.x_rows * truth.first;
    const Eigen::VectorXd zn = b.z_rows * truth.second;
    b.y.resize(n);
    for (int i = 0; i < n; ++i) b.y(i) = config.psi.apply(xm(i) * zn(i)) + b.eps(i);
    return b;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> rotate_truth(
    const std::pair<Eigen::VectorXd, Eigen::VectorXd>& truth, std::uint64_t seed) {
    const auto d = truth.first.size();
    CounterRng rng(stream_key(seed, 0, 0, HalfStep::nu, kStreamRotate));
    Eigen::MatrixXd gauss(d, d);
    rng.fill_normal(gauss.data(), d * d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    Eigen::MatrixXd q = qr.householderQ();
    // Fix the sign ambiguity so Q is Haar-distributed.
    const Eigen::VectorXd rdiag = qr.matrixQR().diagonal();
    for (Eigen::Index j = 0; j < d; ++j)
        if (rdiag(j) < 0.0) q.col(j) = -q.col(j);
    return {q * truth.first, q * truth.second};
}

}  // namespace rank1am
