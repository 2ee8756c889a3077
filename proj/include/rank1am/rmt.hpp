#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rank1am/constants.hpp"

namespace rank1am {

/// Spectral statistics of one weighted Gram draw X^T G^2 X.
struct GramSample {
    int n = 0;
    int d = 0;
    double trace_inv = 0.0;          // tr((X^T G^2 X)^{-1})
    double lambda_min_over_n = 0.0;  // lambda_min(X^T G^2 X) / n
    double lambda_max_over_n = 0.0;  // lambda_max(X^T G^2 X) / n
};

/// The raw draw behind sample_gram, exposed so tests can rebuild the same
/// matrices bit-exactly from the seed.
struct GramDraw {
    Eigen::MatrixXd x;  // n x d, i.i.d. N(0,1)
    Eigen::VectorXd g;  // n, i.i.d. N(0,1) diagonal weights
};
GramDraw draw_gram(int n, int d, std::uint64_t seed);

/// Draws X and G and returns the spectral statistics from one symmetric
/// eigendecomposition.
GramSample sample_gram(int n, int d, std::uint64_t seed);

/// Per-n concentration statistics of the trace inverse around tau = 1/C(n/d).
struct ConcentrationRow {
    int n = 0;
    double tau = 0.0;            // 1/C(n/d)
    double mean_abs_dev = 0.0;   // mean |tau_hat - tau|
    double std_dev = 0.0;        // std of tau_hat
    double band_hits = 0.0;      // fraction with |tau_hat - tau| <= 5/sqrt(n)
    double min_lambda_min_over_n = 0.0;
};

/// Runs `trials` independent samples per n (trials may execute in
/// parallel; aggregation is in sample order).
std::vector<ConcentrationRow> concentration_report(const std::vector<int>& n_list, int d,
                                                   int trials, std::uint64_t seed,
                                                   const QuadratureRule& rule,
                                                   int threads = 0);

}  // namespace rank1am
