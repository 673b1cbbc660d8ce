#include "ecot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecot {

void OracleBudget::check(std::size_t free_count, std::size_t test_count) const {
  if (max_free_indices < 1) {
    throw std::runtime_error("oracle budget allows no free indices");
  }
  if (free_count > static_cast<std::size_t>(max_free_indices)) {
    throw std::runtime_error(
        "oracle budget exceeded: " + std::to_string(free_count) +
        " free indices > " + std::to_string(max_free_indices));
  }
  if (test_count > static_cast<std::size_t>(max_test_points)) {
    throw std::runtime_error(
        "oracle budget exceeded: " + std::to_string(test_count) +
        " test points > " + std::to_string(max_test_points));
  }
}

RejectionReport oracle_full_ecot(const TestingProblem& problem,
                                 const CalibrationSet& calibration,
                                 const ScoreFactory& factory, double alpha,
                                 std::uint64_t seed, const OracleBudget& budget) {
  budget.check(calibration.size() + 1, problem.m());

  // Enumerate once per test point and hand the results to the shared
  // conditional-calibration engine.
  std::size_t m = problem.m();
  std::vector<FullPermutationResult> inputs;
  inputs.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    inputs.push_back(full_permutation_ecot_inputs(
        problem, calibration, problem.test_index(j), factory,
        budget.max_free_indices));
  }
  ConditionalProvider provider = [&](std::size_t j) {
    return ConditionalInputs{inputs[j].pvalue, inputs[j].modified};
  };
  return conditional_calibration(m, provider, alpha, seed, nullptr, problem.n());
}

int oracle_candidate_rejections(const TestingProblem& problem,
                                const PermView& view,
                                const OracleCandidate& candidate, double alpha) {
  std::size_t m = problem.m();
  const auto& calib = candidate.calibration.indices;
  std::vector<double> pvalues(m);
  for (std::size_t l = 0; l < m; ++l) {
    int l_global = problem.test_index(l);
    ScoreModel model = candidate.factory(view, l_global);
    double sl = model(view.feature(l_global));
    std::size_t count = 1;  // self term
    for (int i : calib) count += (sl <= model(view.feature(i)));
    pvalues[l] = static_cast<double>(count) / static_cast<double>(calib.size() + 1);
  }
  return static_cast<int>(bh(pvalues, alpha).size());
}

RejectionReport oracle_selection_full(const TestingProblem& problem,
                                      const std::vector<OracleCandidate>& candidates,
                                      double alpha, std::uint64_t seed,
                                      const OracleBudget& budget) {
  if (candidates.empty()) {
    throw std::invalid_argument("selection oracle needs at least one candidate");
  }
  // Union calibration set drives the permutations.
  std::vector<int> union_calib;
  for (const auto& candidate : candidates) {
    for (int i : candidate.calibration.indices) union_calib.push_back(i);
  }
  std::sort(union_calib.begin(), union_calib.end());
  union_calib.erase(std::unique(union_calib.begin(), union_calib.end()),
                    union_calib.end());
  budget.check(union_calib.size() + 1, problem.m());

  std::size_t m = problem.m();
  std::size_t K = candidates.size();

  auto select_on_view = [&](const PermView& view) {
    std::size_t best = 0;
    int best_rejections = -1;
    for (std::size_t k = 0; k < K; ++k) {
      int r = oracle_candidate_rejections(problem, view, candidates[k], alpha);
      if (r > best_rejections) {  // ties keep the smallest index
        best_rejections = r;
        best = k;
      }
    }
    return best;
  };

  PermView id = PermView::identity(problem);
  std::size_t k_star = select_on_view(id);

  std::vector<ConditionalInputs> inputs(m);
  for (std::size_t j = 0; j < m; ++j) {
    int j_global = problem.test_index(j);
    std::vector<int> free = union_calib;
    free.push_back(j_global);
    PermutationFamily family(std::move(free), budget.max_free_indices);
    const auto& slots = family.free_indices();

    double s_at_j = candidates[k_star].factory(id, j_global)(
        problem.feature(static_cast<std::size_t>(j_global)));

    std::vector<double> own_scores;
    own_scores.reserve(family.size());
    std::vector<std::vector<double>> scores_at_test(m);
    family.for_each([&](const std::vector<int>& arrangement) {
      PermView view(problem, slots, arrangement);
      std::size_t k_sigma = select_on_view(view);
      ScoreModel model = candidates[k_sigma].factory(view, j_global);
      own_scores.push_back(model(view.feature(j_global)));
      for (std::size_t l = 0; l < m; ++l) {
        if (l == j) continue;
        scores_at_test[l].push_back(model(problem.test_features().row(l)));
      }
    });

    std::size_t hits = 0;
    for (double s : own_scores) hits += (s_at_j <= s);
    inputs[j].pvalue =
        static_cast<double>(hits) / static_cast<double>(own_scores.size());
    inputs[j].modified.assign(m, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double stable = lower_median(scores_at_test[l]);
      std::size_t count = 0;
      for (double s : own_scores) count += (stable <= s);
      inputs[j].modified[l] =
          static_cast<double>(count) / static_cast<double>(own_scores.size());
    }
  }

  ConditionalProvider provider = [&](std::size_t j) { return inputs[j]; };
  return conditional_calibration(m, provider, alpha, seed, nullptr, problem.n());
}

SuperUniformityReport oracle_superuniformity(
    const std::function<double(rng::Stream&)>& draw_pvalue, int n_draws,
    std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("need at least one draw");
  std::vector<double> pvalues;
  pvalues.reserve(n_draws);
  for (int i = 0; i < n_draws; ++i) {
    rng::Stream stream(rng::derive(seed, "draw", static_cast<std::uint64_t>(i)));
    pvalues.push_back(draw_pvalue(stream));
  }
  std::sort(pvalues.begin(), pvalues.end());

  SuperUniformityReport report;
  report.draws = n_draws;
  report.max_deviation = -1.0;
  report.max_margin = -1.0;
  double n = static_cast<double>(n_draws);
  for (int k = 1; k <= 100; ++k) {
    double t = static_cast<double>(k) / 100.0;
    double cdf = static_cast<double>(std::upper_bound(pvalues.begin(),
                                                      pvalues.end(), t) -
                                     pvalues.begin()) /
                 n;
    double se = std::sqrt(t * (1.0 - t) / n);
    double deviation = cdf - t;
    double margin = deviation - 3.0 * se;
    if (deviation > report.max_deviation) {
      report.max_deviation = deviation;
      report.worst_t = t;
      report.se_at_worst = se;
    }
    report.max_margin = std::max(report.max_margin, margin);
  }
  report.ok = report.max_margin <= 0.0;
  return report;
}

}  // namespace ecot
