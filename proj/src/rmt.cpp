#include "rank1am/rmt.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <atomic>
#include <numeric>
#include <string>
#include <thread>

#include "rank1am/sampler.hpp"

namespace rank1am {

GramDraw draw_gram(int n, int d, std::uint64_t seed) {
    if (n <= d || d < 1) throw std::invalid_argument("draw_gram: need n > d >= 1");
    CounterRng rng(stream_key(seed, 0, 0, HalfStep::nu, /*stream=*/3));
    GramDraw draw;
    draw.x.resize(n, d);
    rng.fill_normal(draw.x.data(), static_cast<std::ptrdiff_t>(n) * d);
    draw.g.resize(n);
    rng.fill_normal(draw.g.data(), n);
    return draw;
}

GramSample sample_gram(int n, int d, std::uint64_t seed) {
    const GramDraw draw = draw_gram(n, d, seed);
    const Eigen::MatrixXd gx = draw.g.asDiagonal() * draw.x;
    Eigen::MatrixXd gram(d, d);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(gx.adjoint());
    gram = gram.selfadjointView<Eigen::Lower>();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericError("sample_gram: eigendecomposition failed, seed " +
                           std::to_string(seed));
    }

    GramSample s;
    s.n = n;
    s.d = d;
    s.trace_inv = eig.eigenvalues().cwiseInverse().sum();
    s.lambda_min_over_n = eig.eigenvalues()(0) / n;
    s.lambda_max_over_n = eig.eigenvalues()(d - 1) / n;
    return s;
}

std::vector<ConcentrationRow> concentration_report(const std::vector<int>& n_list, int d,
                                                   int trials, std::uint64_t seed,
                                                   const QuadratureRule& rule, int threads) {
    if (trials < 1) throw std::invalid_argument("concentration_report: trials must be >= 1");
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    std::vector<ConcentrationRow> report;
    report.reserve(n_list.size());
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const int n = n_list[ni];
        const double lambda = static_cast<double>(n) / d;
        const ModelConstants mc = solve_c(lambda, rule);
        const double tau = mc.tau;

        std::vector<GramSample> samples(trials);
        {
            std::atomic<int> next{0};
            auto worker = [&]() {
                for (;;) {
                    const int t = next.fetch_add(1);
                    if (t >= trials) break;
                    samples[t] = sample_gram(n, d, seed + 1000003ULL * ni + t);
                }
            };
            std::vector<std::thread> pool;
            for (int w = 0; w < std::min(threads, trials); ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        ConcentrationRow row;
        row.n = n;
        row.tau = tau;
        const double band = 5.0 / std::sqrt(static_cast<double>(n));
        double sum = 0.0, sum_sq = 0.0, sum_abs = 0.0;
        int hits = 0;
        double min_lmin = samples[0].lambda_min_over_n;
        for (const GramSample& s : samples) {
            const double dev = s.trace_inv - tau;
            sum += s.trace_inv;
            sum_sq += s.trace_inv * s.trace_inv;
            sum_abs += std::fabs(dev);
            if (std::fabs(dev) <= band) ++hits;
            min_lmin = std::min(min_lmin, s.lambda_min_over_n);
        }
        const double mean = sum / trials;
        row.mean_abs_dev = sum_abs / trials;
        row.std_dev = std::sqrt(std::max(0.0, sum_sq / trials - mean * mean));
        row.band_hits = static_cast<double>(hits) / trials;
        row.min_lambda_min_over_n = min_lmin;
        report.push_back(row);
    }
    return report;
}

}  // namespace rank1am
