#include "ecot/checks.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace ecot::checks {

namespace {

bool same_set(const std::vector<int>& a, const std::vector<int>& b) {
  return std::set<int>(a.begin(), a.end()) == std::set<int>(b.begin(), b.end());
}

}  // namespace

TestingProblem random_problem(rng::Stream& stream, std::size_t n0,
                              std::size_t n1, std::size_t m, std::size_t d) {
  auto draw = [&](std::size_t rows) {
    Matrix mat(rows, d);
    for (std::size_t i = 0; i < rows; ++i) {
      auto r = mat.row(i);
      for (std::size_t c = 0; c < d; ++c) r[c] = stream.next_gaussian();
    }
    return mat;
  };
  return TestingProblem(draw(n0), draw(n1), draw(m));
}

ScoreFactory pool_distance_factory(std::vector<int> calibration) {
  return [calibration](const PermView& view, int j_global) {
    auto pool = std::make_shared<std::vector<std::vector<double>>>();
    std::vector<int> members = calibration;
    members.push_back(j_global);
    for (int g : members) {
      auto row = view.feature(g);
      pool->emplace_back(row.begin(), row.end());
    }
    auto eval = [pool](std::span<const double> x) {
      std::vector<double> dist;
      dist.reserve(pool->size());
      for (const auto& p : *pool) {
        dist.push_back(std::sqrt(squared_distance(p, x)));
      }
      std::sort(dist.begin(), dist.end());
      return pairwise_sum(dist) / static_cast<double>(dist.size());
    };
    return ScoreModel(eval, Symmetry::calibration_symmetric, "pool-distance");
  };
}

ScoreFactory order_leaking_factory(std::vector<int> calibration) {
  return [calibration](const PermView& view, int j_global) {
    auto pool = std::make_shared<std::vector<std::vector<double>>>();
    std::vector<int> members = calibration;
    members.push_back(j_global);
    for (int g : members) {
      auto row = view.feature(g);
      pool->emplace_back(row.begin(), row.end());
    }
    auto eval = [pool](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < pool->size(); ++i) {
        // position-dependent weight: refits on permuted data disagree
        s += static_cast<double>(i + 1) *
             std::sqrt(squared_distance((*pool)[i], x));
      }
      return s / static_cast<double>(pool->size());
    };
    return ScoreModel(eval, Symmetry::general, "order-leaking-distance");
  };
}

EquivalenceResult reduction_equivalence(int instances, std::uint64_t seed,
                                        const OracleBudget& budget,
                                        bool inject_broken_scorer) {
  EquivalenceResult result;
  result.name = inject_broken_scorer ? "reduction-equivalence(broken-scorer)"
                                     : "reduction-equivalence";
  if (budget.max_free_indices < 1) {
    result.skipped = true;
    return result;
  }
  result.instances = instances;
  auto max_c = static_cast<std::size_t>(
      std::min(4, budget.max_free_indices - 1));
  auto max_m = static_cast<std::size_t>(std::min(5, budget.max_test_points));

  for (int inst = 0; inst < instances; ++inst) {
    rng::Stream stream(rng::derive(seed, "instance", inst));
    std::size_t c = stream.next_below(max_c + 1);
    std::size_t m = 1 + stream.next_below(max_m);
    std::size_t n0 = std::max<std::size_t>(1, c + stream.next_below(2));
    std::size_t d = 1 + stream.next_below(3);
    TestingProblem problem = random_problem(stream, n0, 0, m, d);
    CalibrationSet calibration;
    for (std::size_t i = 0; i < c; ++i) {
      calibration.indices.push_back(static_cast<int>(i));
    }
    ScoreFactory factory = inject_broken_scorer
                               ? order_leaking_factory(calibration.indices)
                               : pool_distance_factory(calibration.indices);
    std::uint64_t cc_seed = rng::derive(seed, "cc", inst);
    double alpha = 0.2;

    RejectionReport full =
        oracle_full_ecot(problem, calibration, factory, alpha, cc_seed, budget);

    // Reduced path: one identity model per test point.
    PermView id = PermView::identity(problem);
    std::vector<double> reduced_p(m);
    std::vector<std::vector<double>> reduced_modified(m);
    std::vector<double> full_p(m);
    for (std::size_t j = 0; j < m; ++j) {
      int j_global = problem.test_index(j);
      ScoreModel model = factory(id, j_global);
      std::vector<double> calib_with_own;
      calib_with_own.reserve(c + 1);
      for (int i : calibration.indices) {
        calib_with_own.push_back(
            model(problem.feature(static_cast<std::size_t>(i))));
      }
      calib_with_own.push_back(
          model(problem.feature(static_cast<std::size_t>(j_global))));
      std::vector<double> test_scores(m);
      for (std::size_t l = 0; l < m; ++l) {
        test_scores[l] = model(problem.test_features().row(l));
      }
      reduced_p[j] = pvalue_reduced_calibration_symmetric(calib_with_own, c);
      reduced_modified[j] =
          modified_pvalues_reduced(test_scores, calib_with_own, j);

      FullPermutationResult fp = full_permutation_ecot_inputs(
          problem, calibration, j_global, factory, budget.max_free_indices);
      full_p[j] = fp.pvalue;
      for (std::size_t l = 0; l < m; ++l) {
        result.max_discrepancy = std::max(
            result.max_discrepancy, std::abs(fp.modified[l] - reduced_modified[j][l]));
      }
      result.max_discrepancy =
          std::max(result.max_discrepancy, std::abs(fp.pvalue - reduced_p[j]));
    }

    ConditionalProvider provider = [&](std::size_t j) {
      return ConditionalInputs{reduced_p[j], reduced_modified[j]};
    };
    RejectionReport reduced = conditional_calibration(
        m, provider, alpha, cc_seed, nullptr, problem.n());

    bool mismatch = !same_set(full.rejected, reduced.rejected) ||
                    !same_set(full.r_init, reduced.r_init);
    for (std::size_t j = 0; j < m && !mismatch; ++j) {
      mismatch = full_p[j] != reduced_p[j];
    }
    if (mismatch) ++result.failures;
  }
  return result;
}

EquivalenceResult bh_collapse(int instances, std::uint64_t seed,
                              const OracleBudget& budget) {
  EquivalenceResult result;
  result.name = "bh-collapse";
  if (budget.max_free_indices < 1) {
    result.skipped = true;
    return result;
  }
  result.instances = instances;
  for (int inst = 0; inst < instances; ++inst) {
    rng::Stream stream(rng::derive(seed, "joint-instance", inst));
    std::size_t c = 1 + stream.next_below(20);
    std::size_t m = 1 + stream.next_below(20);
    bool discrete = inst % 3 == 0;  // exercise ties
    auto draw_score = [&]() {
      return discrete ? static_cast<double>(stream.next_below(5))
                      : stream.next_uniform();
    };
    std::vector<double> calib(c), test(m);
    for (auto& v : calib) v = draw_score();
    for (auto& v : test) v = draw_score();

    std::vector<double> sorted = calib;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> pvalues(m);
    for (std::size_t j = 0; j < m; ++j) {
      pvalues[j] =
          static_cast<double>(count_at_or_above(sorted, test[j]) + 1) /
          static_cast<double>(c + 1);
    }
    double alpha = 0.3;
    auto bh_set = bh(pvalues, alpha);

    auto provider = make_shared_score_provider(calib, test);
    RejectionReport cc = conditional_calibration(
        m, provider, alpha, rng::derive(seed, "cc", inst));

    std::vector<int> cc_local = cc.rejected;
    if (!same_set(cc_local, bh_set)) {
      ++result.failures;
      result.max_discrepancy = 1.0;
    }
  }
  return result;
}

EquivalenceResult jackknife_equivalence(int instances, std::uint64_t seed,
                                        const OracleBudget& budget) {
  EquivalenceResult result;
  result.name = "jackknife-equivalence";
  if (budget.max_free_indices < 1) {
    result.skipped = true;
    return result;
  }
  result.instances = instances;
  for (int inst = 0; inst < instances; ++inst) {
    rng::Stream stream(rng::derive(seed, "jackknife-instance", inst));
    std::size_t c = 1 + stream.next_below(4);
    std::size_t m = 1 + stream.next_below(4);
    std::size_t d = 1 + stream.next_below(2);
    TestingProblem problem = random_problem(stream, c, 0, m, d);
    CalibrationSet calibration = CalibrationSet::all_nulls(problem);

    LeaveOneOutFactory factory = [&problem](const std::vector<int>& pool_indices) {
      auto pool = std::make_shared<std::vector<std::vector<double>>>();
      for (int g : pool_indices) {
        auto row = problem.feature(static_cast<std::size_t>(g));
        pool->emplace_back(row.begin(), row.end());
      }
      auto eval = [pool](std::span<const double> x) {
        std::vector<double> dist;
        dist.reserve(pool->size());
        for (const auto& p : *pool) {
          dist.push_back(std::sqrt(squared_distance(p, x)));
        }
        std::sort(dist.begin(), dist.end());
        return pairwise_sum(dist) / static_cast<double>(dist.size());
      };
      return ScoreModel(eval, Symmetry::jackknife_type, "loo-pool-distance");
    };

    auto own = jackknife_loo_scores(problem, calibration, factory);
    std::span<const double> calib_scores(own.data(), c);
    std::span<const double> test_scores(own.data() + c, m);
    auto inputs = jackknife_cc_inputs(calib_scores, test_scores);

    double alpha = 0.3;
    auto bh_set = bh(inputs.pvalues, alpha);
    ConditionalProvider provider = [&](std::size_t j) {
      return ConditionalInputs{inputs.pvalues[j], inputs.modified[j]};
    };
    RejectionReport cc = conditional_calibration(
        m, provider, alpha, rng::derive(seed, "cc", inst));
    if (!same_set(cc.rejected, bh_set)) {
      ++result.failures;
      result.max_discrepancy = 1.0;
    }
  }
  return result;
}

}  // namespace ecot::checks
