#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecot/core.hpp"
#include "ecot/methods.hpp"

namespace ecot::sim {

struct ScenarioConfig {
  std::string scenario = "mean-shift";  // mean-shift | variance-shift
  std::size_t d = 50;
  double a = 1.0;       // signal strength
  double pi = 0.95;     // null fraction of the test set
  std::size_t n0 = 400;
  std::size_t n1 = 100;
  std::size_t m = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedProblem {
  TestingProblem problem;
  std::vector<int> labels;  // 0/1 per test point, evaluation only
};

// Nulls are N(0, I_d); non-nulls are N(mu, I_d) with the first five
// coordinates of mu equal to sqrt(a log d). The test set carries exactly
// round((1-pi) m) non-nulls at seeded-shuffled positions.
GeneratedProblem generate_mean_shift(const ScenarioConfig& config);

// X = sqrt(1 + a 1{Y=1}) V + W with V ~ N(0, I_d) and W drawn uniformly
// from an anchor set of d points sampled once per replicate from U[-3,3]^d.
GeneratedProblem generate_variance_shift(const ScenarioConfig& config);

GeneratedProblem generate(const ScenarioConfig& config);

// Per replicate: fresh data and method seeds derived by counter, one method
// run, one (fdp, tpp) record. Replicates run on `threads` workers; the fold
// is in replicate order, so reports are bit-identical for a given seed.
MonteCarloReport monte_carlo(const MethodSpec& method,
                             const ScenarioConfig& scenario, int replicates,
                             std::uint64_t seed, int threads = 1);

}  // namespace ecot::sim
