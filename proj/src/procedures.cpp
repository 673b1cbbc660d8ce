#include "ecot/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecot/pvalues.hpp"
#include "ecot/rng.hpp"

namespace ecot {

std::vector<int> bh(std::span<const double> pvalues, double alpha) {
  std::size_t m = pvalues.size();
  if (m == 0) return {};
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t k_star = 0;
  for (std::size_t k = m; k >= 1; --k) {
    if (sorted[k - 1] <= alpha * static_cast<double>(k) / static_cast<double>(m)) {
      k_star = k;
      break;
    }
  }
  std::vector<int> rejected;
  if (k_star == 0) return rejected;
  double threshold = alpha * static_cast<double>(k_star) / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (pvalues[j] <= threshold) rejected.push_back(static_cast<int>(j));
  }
  return rejected;
}

std::vector<int> bh(std::span<const double> pvalues, const BHConfig& config) {
  if (!config.weights) return bh(pvalues, config.alpha);
  const auto& w = *config.weights;
  if (w.size() != pvalues.size()) {
    throw std::invalid_argument("bh: weight count mismatch");
  }
  std::vector<double> weighted(pvalues.size());
  for (std::size_t j = 0; j < pvalues.size(); ++j) {
    if (w[j] <= 0.0) throw std::invalid_argument("bh: weights must be positive");
    weighted[j] = pvalues[j] * w[j];
  }
  return bh(weighted, config.alpha);
}

PruningTrace prune_bh_level_one(std::span<const double> epsilons,
                                std::span<const int> r_j_sizes,
                                std::size_t r_init_size) {
  if (epsilons.size() != r_j_sizes.size()) {
    throw std::invalid_argument("prune: size mismatch");
  }
  PruningTrace trace;
  trace.epsilons.assign(epsilons.begin(), epsilons.end());
  trace.threshold_ratio.resize(epsilons.size());
  std::vector<double> values(epsilons.size());
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    trace.threshold_ratio[i] = static_cast<double>(r_j_sizes[i]) /
                               static_cast<double>(r_init_size);
    values[i] = epsilons[i] * trace.threshold_ratio[i];
  }
  auto kept = bh(values, 1.0);
  trace.final_kept = std::move(kept);
  return trace;
}

RejectionReport conditional_calibration(std::size_t m,
                                        const ConditionalProvider& provider,
                                        double alpha, std::uint64_t seed,
                                        const NullPropProvider* pi_provider,
                                        std::size_t first_test_index) {
  RejectionReport report;
  report.seed = seed;
  report.r_j_sizes.resize(m);

  std::vector<double> pvalues(m);
  double pi_sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    ConditionalInputs inputs = provider(j);
    if (inputs.modified.size() != m) {
      throw std::invalid_argument("conditional_calibration: modified p-value length mismatch");
    }
    double w = 1.0;
    if (pi_provider) {
      w = (*pi_provider)(j);
      if (w <= 0.0) throw std::invalid_argument("null-proportion weight must be positive");
      for (auto& v : inputs.modified) v *= w;
      pi_sum += w;
    }
    pvalues[j] = inputs.pvalue * w;
    report.r_j_sizes[j] = static_cast<int>(bh(inputs.modified, alpha).size());
  }
  if (pi_provider && m > 0) {
    report.null_prop_estimate = pi_sum / static_cast<double>(m);
  }

  std::vector<int> r_init;
  for (std::size_t j = 0; j < m; ++j) {
    double bar = alpha * static_cast<double>(report.r_j_sizes[j]) /
                 static_cast<double>(m);
    if (pvalues[j] <= bar) r_init.push_back(static_cast<int>(j));
  }
  for (int j : r_init) {
    report.r_init.push_back(static_cast<int>(first_test_index) + j);
  }
  if (r_init.empty()) {
    return report;  // no pruning draw consumed
  }

  bool needs_pruning = false;
  for (int j : r_init) {
    if (report.r_j_sizes[static_cast<std::size_t>(j)] >
        static_cast<int>(r_init.size())) {
      needs_pruning = true;
      break;
    }
  }
  if (!needs_pruning) {
    report.rejected = report.r_init;
    return report;
  }

  // Uniforms for every test index in ascending order; members of the
  // initial set use theirs.
  rng::Stream eps_stream(rng::derive(seed, "pruning"));
  std::vector<double> all_eps(m);
  for (std::size_t j = 0; j < m; ++j) all_eps[j] = eps_stream.next_uniform();

  std::vector<double> eps;
  std::vector<int> sizes;
  eps.reserve(r_init.size());
  sizes.reserve(r_init.size());
  for (int j : r_init) {
    eps.push_back(all_eps[static_cast<std::size_t>(j)]);
    sizes.push_back(report.r_j_sizes[static_cast<std::size_t>(j)]);
  }
  PruningTrace trace = prune_bh_level_one(eps, sizes, r_init.size());
  for (int pos : trace.final_kept) {
    report.rejected.push_back(report.r_init[static_cast<std::size_t>(pos)]);
  }
  report.pruned = true;
  return report;
}

ConditionalProvider make_shared_score_provider(std::vector<double> calib_scores,
                                               std::vector<double> test_scores) {
  struct State {
    std::vector<double> sorted_calib;
    std::vector<double> test;
  };
  auto state = std::make_shared<State>();
  state->sorted_calib = std::move(calib_scores);
  std::sort(state->sorted_calib.begin(), state->sorted_calib.end());
  state->test = std::move(test_scores);
  return [state](std::size_t j) {
    const auto& calib = state->sorted_calib;
    const auto& test = state->test;
    double denom = static_cast<double>(calib.size() + 1);
    double own = test[j];
    ConditionalInputs inputs;
    inputs.pvalue =
        static_cast<double>(count_at_or_above(calib, own) + 1) / denom;
    inputs.modified.assign(test.size(), 0.0);
    for (std::size_t l = 0; l < test.size(); ++l) {
      if (l == j) continue;
      std::size_t count =
          count_at_or_above(calib, test[l]) + (test[l] <= own ? 1 : 0);
      inputs.modified[l] = static_cast<double>(count) / denom;
    }
    return inputs;
  };
}

double storey_null_proportion(std::span<const double> aux_calib_scores,
                              std::span<const double> aux_test_scores,
                              std::size_t j, double lambda) {
  if (lambda <= 0.0 || lambda >= 1.0) {
    throw std::invalid_argument("storey: lambda must lie in (0,1)");
  }
  std::size_t m = aux_test_scores.size();
  if (j >= m) throw std::domain_error("storey: j out of range");
  std::vector<double> sorted(aux_calib_scores.begin(), aux_calib_scores.end());
  sorted.push_back(aux_test_scores[j]);
  std::sort(sorted.begin(), sorted.end());
  double denom = static_cast<double>(sorted.size());
  std::size_t tail = 0;
  for (std::size_t l = 0; l < m; ++l) {
    if (l == j) continue;
    double p = static_cast<double>(count_at_or_above(sorted, aux_test_scores[l])) /
               denom;
    tail += (p >= lambda);
  }
  return static_cast<double>(1 + tail) /
         (static_cast<double>(m) * (1.0 - lambda));
}

double label_assisted_null_proportion(std::size_t c0_size, std::size_t c1_size) {
  if (c0_size == 0 && c1_size == 0) {
    throw std::invalid_argument("label-assisted estimator needs a non-empty calibration split");
  }
  return static_cast<double>(1 + c0_size) /
         static_cast<double>(1 + c0_size + c1_size);
}

}  // namespace ecot
