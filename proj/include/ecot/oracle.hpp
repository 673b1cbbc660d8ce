#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ecot/core.hpp"
#include "ecot/pvalues.hpp"
#include "ecot/procedures.hpp"
#include "ecot/rng.hpp"

namespace ecot {

// Enumeration limits for the brute-force checks. The factorial of the free
// set times the test count stays far below 1e6 score evaluations at the
// defaults.
struct OracleBudget {
  int max_free_indices = 6;  // |C| + 1
  int max_test_points = 8;

  // Throws std::runtime_error when a check would exceed the budget.
  void check(std::size_t free_count, std::size_t test_count) const;
};

// Literal transcription of the unified procedure: full-permutation
// p-values, lower-median stabilized scores, modified p-values, conditional
// calibration with randomized pruning.
RejectionReport oracle_full_ecot(const TestingProblem& problem,
                                 const CalibrationSet& calibration,
                                 const ScoreFactory& factory, double alpha,
                                 std::uint64_t seed,
                                 const OracleBudget& budget = {});

// A candidate testing approach for the full-permutation selection oracle.
// The factory must be calibration-symmetric in its own calibration set plus
// the test point, so its per-arrangement p-values reduce to rank form.
struct OracleCandidate {
  CalibrationSet calibration;
  ScoreFactory factory;
};

// Rejection count of one candidate approach on an arranged view of the
// data: reduced conformal p-values for every test point, then BH.
int oracle_candidate_rejections(const TestingProblem& problem,
                                const PermView& view,
                                const OracleCandidate& candidate, double alpha);

// Full-permutation approach selection: the winner is re-selected under
// every arrangement, and the p-values average indicators of the
// per-arrangement winners' scores. Conditional calibration finishes.
RejectionReport oracle_selection_full(const TestingProblem& problem,
                                      const std::vector<OracleCandidate>& candidates,
                                      double alpha, std::uint64_t seed,
                                      const OracleBudget& budget = {});

struct SuperUniformityReport {
  int draws = 0;
  double max_deviation = 0.0;  // max over the grid of F(t) - t
  double worst_t = 0.0;
  double se_at_worst = 0.0;
  // max over the grid of F(t) - t - 3 se(t); <= 0 means the check passed
  double max_margin = 0.0;
  bool ok = false;
};

// Draws n p-values from independent null instances and checks the empirical
// CDF against the super-uniformity band F(t) <= t + 3 sqrt(t(1-t)/n) on a
// 100-point grid. The callback receives a fresh stream per draw; returning
// a value above 1 excludes the draw from every CDF count (used for joint
// events like {p <= t, Y = 0}).
SuperUniformityReport oracle_superuniformity(
    const std::function<double(rng::Stream&)>& draw_pvalue, int n_draws,
    std::uint64_t seed);

}  // namespace ecot
