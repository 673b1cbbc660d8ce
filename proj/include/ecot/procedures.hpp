#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ecot/core.hpp"

namespace ecot {

struct BHConfig {
  double alpha = 0.1;
  std::optional<std::vector<double>> weights;  // positive per-hypothesis multipliers
};

// Step-up BH at level alpha: k* = max{k : p_(k) <= alpha k / m}, rejecting
// every hypothesis with p <= alpha k* / m. Returns ascending indices.
std::vector<int> bh(std::span<const double> pvalues, double alpha);
std::vector<int> bh(std::span<const double> pvalues, const BHConfig& config);

// Randomized pruning pass: BH at level 1 over {eps_j |R_j| / r_init_size}.
// Every kept j satisfies eps_j <= |kept| / |R_j| at the fixed point.
struct PruningTrace {
  std::vector<double> epsilons;         // per member of r_init, in order
  std::vector<double> threshold_ratio;  // |R_j| / |R_init| per member
  std::vector<int> final_kept;          // positions into r_init
};

PruningTrace prune_bh_level_one(std::span<const double> epsilons,
                                std::span<const int> r_j_sizes,
                                std::size_t r_init_size);

// Per-test-point ingredients for conditional calibration: the p-value and
// the modified p-values of every other test point under this point's score.
struct ConditionalInputs {
  double pvalue = 1.0;
  std::vector<double> modified;  // over test offsets; entry j must be 0
};

using ConditionalProvider = std::function<ConditionalInputs(std::size_t j)>;
using NullPropProvider = std::function<double(std::size_t j)>;

// Conditional calibration: R_j = |bh(modified_j, alpha)|, the initial set
// {j : p_j <= alpha |R_j| / m}, and a randomized pruning pass whenever some
// member has |R_j| > |R_init|. When a null-proportion provider is given,
// both the p-values and the modified p-values are multiplied by pi_j.
// Pruning uniforms are drawn in ascending test-index order from a stream
// derived from `seed`; no draw is consumed when pruning is skipped.
RejectionReport conditional_calibration(
    std::size_t m, const ConditionalProvider& provider, double alpha,
    std::uint64_t seed, const NullPropProvider* pi_provider = nullptr,
    std::size_t first_test_index = 0);

// Conditional-calibration provider for a single shared score function:
// p-values and modified p-values are rank statistics of the test scores
// against the calibration scores plus the own-point score.
ConditionalProvider make_shared_score_provider(std::vector<double> calib_scores,
                                               std::vector<double> test_scores);

// Storey-type null-proportion estimate from an auxiliary joint-symmetric
// score: auxiliary modified p-values of the other test points, then
// (1 + #{p >= lambda}) / (m (1-lambda)). May exceed 1; not clipped.
double storey_null_proportion(std::span<const double> aux_calib_scores,
                              std::span<const double> aux_test_scores,
                              std::size_t j, double lambda);

// (1 + |C0|) / (1 + |C0| + |C1|). Valid when the labeled data is
// exchangeable with the test data and the score is symmetric in C u C1 u {j}.
double label_assisted_null_proportion(std::size_t c0_size, std::size_t c1_size);

}  // namespace ecot
