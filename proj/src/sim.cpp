#include "ecot/sim.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "ecot/rng.hpp"

namespace ecot::sim {

void ScenarioConfig::validate() const {
  if (scenario != "mean-shift" && scenario != "variance-shift") {
    throw std::invalid_argument("unknown scenario: " + scenario);
  }
  if (scenario == "mean-shift" && d < 5) {
    throw std::invalid_argument("mean-shift scenario needs d >= 5");
  }
  if (d < 1) throw std::invalid_argument("d must be positive");
  if (a < 0.0) throw std::invalid_argument("signal strength must be >= 0");
  if (pi < 0.0 || pi > 1.0) throw std::invalid_argument("pi must lie in [0,1]");
  if (n0 < 1 || m < 1) throw std::invalid_argument("n0 and m must be >= 1");
}

namespace {

// Exactly round((1-pi) m) ones, at seeded-shuffled positions.
std::vector<int> test_labels(const ScenarioConfig& config) {
  auto k1 = static_cast<std::size_t>(
      std::lround((1.0 - config.pi) * static_cast<double>(config.m)));
  std::vector<int> positions(config.m);
  std::iota(positions.begin(), positions.end(), 0);
  rng::Stream stream(rng::derive(config.seed, "labels"));
  stream.shuffle(positions);
  std::vector<int> labels(config.m, 0);
  for (std::size_t i = 0; i < k1; ++i) {
    labels[static_cast<std::size_t>(positions[i])] = 1;
  }
  return labels;
}

}  // namespace

GeneratedProblem generate_mean_shift(const ScenarioConfig& config) {
  config.validate();
  std::vector<double> mu(config.d, 0.0);
  double shift = std::sqrt(config.a * std::log(static_cast<double>(config.d)));
  for (std::size_t c = 0; c < 5; ++c) mu[c] = shift;

  auto labels = test_labels(config);
  rng::Stream rows(rng::derive(config.seed, "rows"));
  auto fill = [&](Matrix& mat, std::size_t i, bool nonnull) {
    auto r = mat.row(i);
    for (std::size_t c = 0; c < config.d; ++c) {
      r[c] = rows.next_gaussian() + (nonnull ? mu[c] : 0.0);
    }
  };

  Matrix d0(config.n0, config.d);
  for (std::size_t i = 0; i < config.n0; ++i) fill(d0, i, false);
  Matrix d1(config.n1, config.d);
  for (std::size_t i = 0; i < config.n1; ++i) fill(d1, i, true);
  Matrix du(config.m, config.d);
  for (std::size_t j = 0; j < config.m; ++j) fill(du, j, labels[j] == 1);

  return {TestingProblem(std::move(d0), std::move(d1), std::move(du)),
          std::move(labels)};
}

GeneratedProblem generate_variance_shift(const ScenarioConfig& config) {
  config.validate();

  // Anchor set: d points from U[-3,3]^d, fixed within the replicate.
  rng::Stream anchor_stream(rng::derive(config.seed, "anchors"));
  Matrix anchors(config.d, config.d);
  for (std::size_t i = 0; i < config.d; ++i) {
    auto r = anchors.row(i);
    for (std::size_t c = 0; c < config.d; ++c) {
      r[c] = -3.0 + 6.0 * anchor_stream.next_uniform();
    }
  }

  auto labels = test_labels(config);
  rng::Stream rows(rng::derive(config.seed, "rows"));
  auto fill = [&](Matrix& mat, std::size_t i, bool nonnull) {
    double scale = std::sqrt(1.0 + (nonnull ? config.a : 0.0));
    auto anchor = anchors.row(rows.next_below(config.d));
    auto r = mat.row(i);
    for (std::size_t c = 0; c < config.d; ++c) {
      r[c] = scale * rows.next_gaussian() + anchor[c];
    }
  };

  Matrix d0(config.n0, config.d);
  for (std::size_t i = 0; i < config.n0; ++i) fill(d0, i, false);
  Matrix d1(config.n1, config.d);
  for (std::size_t i = 0; i < config.n1; ++i) fill(d1, i, true);
  Matrix du(config.m, config.d);
  for (std::size_t j = 0; j < config.m; ++j) fill(du, j, labels[j] == 1);

  return {TestingProblem(std::move(d0), std::move(d1), std::move(du)),
          std::move(labels)};
}

GeneratedProblem generate(const ScenarioConfig& config) {
  config.validate();
  if (config.scenario == "mean-shift") return generate_mean_shift(config);
  return generate_variance_shift(config);
}

MonteCarloReport monte_carlo(const MethodSpec& method,
                             const ScenarioConfig& scenario, int replicates,
                             std::uint64_t seed, int threads) {
  if (replicates < 1) throw std::invalid_argument("need at least one replicate");
  scenario.validate();
  if (scenario.n1 < method_min_nonnulls(method)) {
    throw std::invalid_argument("method " + method.name +
                                " is incompatible with n1 = " +
                                std::to_string(scenario.n1));
  }

  std::vector<FdpPower> results(replicates);
  auto run_one = [&](int r) {
    ScenarioConfig data_config = scenario;
    data_config.seed = rng::derive(seed, "data", static_cast<std::uint64_t>(r));
    MethodSpec spec = method;
    spec.seed = rng::derive(seed, "method", static_cast<std::uint64_t>(r));
    GeneratedProblem generated = generate(data_config);
    RejectionReport report = run_method(generated.problem, spec);
    results[r] = fdp_and_power(report.rejected, generated.labels,
                               generated.problem.n());
  };

  int workers = std::max(1, threads);
  if (workers == 1) {
    for (int r = 0; r < replicates; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          int r = next.fetch_add(1);
          if (r >= replicates) return;
          run_one(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return MonteCarloReport::aggregate(std::move(results));
}

}  // namespace ecot::sim
