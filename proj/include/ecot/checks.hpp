#pragma once

#include <cstdint>
#include <string>

#include "ecot/oracle.hpp"

namespace ecot::checks {

// One equivalence suite over seeded random instances. `max_discrepancy` is
// the largest absolute p-value difference seen (0 when the claim holds
// exactly); `failures` counts instances with any p-value or rejection-set
// mismatch.
struct EquivalenceResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  double max_discrepancy = 0.0;
  bool skipped = false;

  bool passed() const { return skipped || failures == 0; }
};

// Full-permutation ECOT against the reduced calibration-symmetric path:
// identical p-values (exact) and identical rejection sets. With
// `inject_broken_scorer` the factory leaks arrangement order, which the
// suite is expected to flag.
EquivalenceResult reduction_equivalence(int instances, std::uint64_t seed,
                                        const OracleBudget& budget,
                                        bool inject_broken_scorer = false);

// Conditional calibration against plain BH under joint-symmetric scores:
// set-exact agreement.
EquivalenceResult bh_collapse(int instances, std::uint64_t seed,
                              const OracleBudget& budget);

// BH over leave-one-out p-values against the conditional-calibration
// variant with swapped-pair modified p-values: set-exact agreement.
EquivalenceResult jackknife_equivalence(int instances, std::uint64_t seed,
                                        const OracleBudget& budget);

// Random small problem with iid standard normal features (helper shared by
// the suites and the tests).
TestingProblem random_problem(rng::Stream& stream, std::size_t n0,
                              std::size_t n1, std::size_t m, std::size_t d);

// Calibration-symmetric factory: mean distance from the query to the rows
// occupying the calibration slots plus the test slot.
ScoreFactory pool_distance_factory(std::vector<int> calibration);

// Deliberately asymmetric factory: distances weighted by slot position, so
// permuted refits disagree.
ScoreFactory order_leaking_factory(std::vector<int> calibration);

}  // namespace ecot::checks
