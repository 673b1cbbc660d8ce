#include "ecot/pvalues.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecot {

std::size_t count_at_or_above(std::span<const double> sorted, double s) {
  return sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s);
}

double lower_median(std::vector<double> values) {
  if (values.empty()) throw std::domain_error("median of empty set");
  std::size_t pos = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + pos, values.end());
  return values[pos];
}

double pvalue_reduced_calibration_symmetric(
    std::span<const double> scores_on_c_and_j, std::size_t j_position) {
  if (scores_on_c_and_j.empty()) {
    throw std::domain_error("empty score vector");
  }
  if (j_position >= scores_on_c_and_j.size()) {
    throw std::domain_error("j_position out of range");
  }
  double sj = scores_on_c_and_j[j_position];
  std::size_t count = 0;
  for (double s : scores_on_c_and_j) count += (sj <= s);
  return static_cast<double>(count) /
         static_cast<double>(scores_on_c_and_j.size());
}

double pvalue_joint_symmetric(const ScoreModel& model,
                              const TestingProblem& problem,
                              const CalibrationSet& calibration, int j_global) {
  if (model.symmetry() != Symmetry::joint_symmetric) {
    throw std::logic_error("pvalue_joint_symmetric needs a joint-symmetric model");
  }
  if (!problem.is_test_index(static_cast<std::size_t>(j_global))) {
    throw std::domain_error("j must be a test index");
  }
  calibration.validate(problem);
  std::vector<double> scores;
  scores.reserve(calibration.size() + 1);
  for (int i : calibration.indices) {
    scores.push_back(model(problem.feature(static_cast<std::size_t>(i))));
  }
  scores.push_back(model(problem.feature(static_cast<std::size_t>(j_global))));
  return pvalue_reduced_calibration_symmetric(scores, scores.size() - 1);
}

std::vector<double> modified_pvalues_reduced(
    std::span<const double> test_scores,
    std::span<const double> calib_scores_with_j, std::size_t j_offset,
    bool add_one) {
  if (calib_scores_with_j.empty()) {
    throw std::domain_error("empty calibration score vector");
  }
  if (j_offset >= test_scores.size()) {
    throw std::domain_error("j_offset out of range");
  }
  std::vector<double> sorted(calib_scores_with_j.begin(),
                             calib_scores_with_j.end());
  std::sort(sorted.begin(), sorted.end());
  double denom = static_cast<double>(sorted.size() + (add_one ? 1 : 0));
  std::vector<double> out(test_scores.size());
  for (std::size_t l = 0; l < test_scores.size(); ++l) {
    if (l == j_offset) {
      out[l] = 0.0;
      continue;
    }
    std::size_t count = count_at_or_above(sorted, test_scores[l]) +
                        (add_one ? 1 : 0);
    out[l] = static_cast<double>(count) / denom;
  }
  return out;
}

namespace {

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

PermutationFamily::PermutationFamily(std::vector<int> free_indices, int cap)
    : free_(std::move(free_indices)) {
  std::sort(free_.begin(), free_.end());
  if (cap >= 0 && free_.size() > static_cast<std::size_t>(cap)) {
    throw std::runtime_error(
        "permutation enumeration refused: " + std::to_string(free_.size()) +
        " free indices exceed the cap of " + std::to_string(cap) +
        "; use a reduced form instead");
  }
}

std::size_t PermutationFamily::size() const { return factorial(free_.size()); }

void PermutationFamily::for_each(
    const std::function<void(const std::vector<int>&)>& visit) const {
  std::vector<int> arrangement = free_;
  do {
    visit(arrangement);
  } while (std::next_permutation(arrangement.begin(), arrangement.end()));
}

PermView::PermView(const TestingProblem& problem, const std::vector<int>& slots,
                   const std::vector<int>& arrangement)
    : problem_(&problem), slots_(slots), arrangement_(arrangement) {
  if (slots_.size() != arrangement_.size()) {
    throw std::invalid_argument("slots/arrangement size mismatch");
  }
}

PermView PermView::identity(const TestingProblem& problem) {
  return PermView(problem, {}, {});
}

int PermView::sigma(int global) const {
  auto it = std::lower_bound(slots_.begin(), slots_.end(), global);
  if (it != slots_.end() && *it == global) {
    return arrangement_[it - slots_.begin()];
  }
  return global;
}

FullPermutationResult full_permutation_ecot_inputs(
    const TestingProblem& problem, const CalibrationSet& calibration,
    int j_global, const ScoreFactory& factory, int cap) {
  if (!problem.is_test_index(static_cast<std::size_t>(j_global))) {
    throw std::domain_error("j must be a test index");
  }
  calibration.validate(problem);

  std::vector<int> free = calibration.indices;
  free.push_back(j_global);
  PermutationFamily family(std::move(free), cap);
  const auto& slots = family.free_indices();

  std::size_t m = problem.m();
  std::size_t j_offset = static_cast<std::size_t>(j_global) - problem.n();

  // Identity score of the test point (the left side of every indicator).
  double s_at_j =
      factory(PermView::identity(problem), j_global)(
          problem.feature(static_cast<std::size_t>(j_global)));

  std::vector<double> own_scores;  // S_sigma(X_{sigma(j)}) per permutation
  own_scores.reserve(family.size());
  // scores_at_test[l] collects S_sigma(X_l) across permutations, l != j.
  std::vector<std::vector<double>> scores_at_test(m);
  for (std::size_t l = 0; l < m; ++l) {
    if (l != j_offset) scores_at_test[l].reserve(family.size());
  }

  family.for_each([&](const std::vector<int>& arrangement) {
    PermView view(problem, slots, arrangement);
    ScoreModel model = factory(view, j_global);
    own_scores.push_back(model(view.feature(j_global)));
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j_offset) continue;
      scores_at_test[l].push_back(
          model(problem.test_features().row(l)));
    }
  });

  FullPermutationResult result;
  std::size_t hits = 0;
  for (double s : own_scores) hits += (s_at_j <= s);
  result.pvalue =
      static_cast<double>(hits) / static_cast<double>(own_scores.size());

  result.modified.assign(m, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    if (l == j_offset) continue;
    double stable = lower_median(scores_at_test[l]);
    std::size_t count = 0;
    for (double s : own_scores) count += (stable <= s);
    result.modified[l] =
        static_cast<double>(count) / static_cast<double>(own_scores.size());
  }
  return result;
}

double pvalue_full_permutation(const TestingProblem& problem,
                               const CalibrationSet& calibration, int j_global,
                               const ScoreFactory& factory, int cap) {
  if (!problem.is_test_index(static_cast<std::size_t>(j_global))) {
    throw std::domain_error("j must be a test index");
  }
  calibration.validate(problem);
  std::vector<int> free = calibration.indices;
  free.push_back(j_global);
  PermutationFamily family(std::move(free), cap);
  const auto& slots = family.free_indices();

  double s_at_j =
      factory(PermView::identity(problem), j_global)(
          problem.feature(static_cast<std::size_t>(j_global)));
  std::size_t hits = 0;
  family.for_each([&](const std::vector<int>& arrangement) {
    PermView view(problem, slots, arrangement);
    ScoreModel model = factory(view, j_global);
    hits += (s_at_j <= model(view.feature(j_global)));
  });
  return static_cast<double>(hits) / static_cast<double>(family.size());
}

std::vector<double> modified_pvalues_full(const TestingProblem& problem,
                                          const CalibrationSet& calibration,
                                          int j_global,
                                          const ScoreFactory& factory, int cap) {
  return full_permutation_ecot_inputs(problem, calibration, j_global, factory,
                                      cap)
      .modified;
}

namespace {

// Compares factory output on an ascending vs reversed pool ordering; any
// difference means the factory leaks row order.
void probe_loo_factory(const TestingProblem& problem,
                       const std::vector<int>& pool,
                       const LeaveOneOutFactory& factory) {
  std::vector<int> reversed(pool.rbegin(), pool.rend());
  ScoreModel a = factory(pool);
  ScoreModel b = factory(reversed);
  for (int g : pool) {
    auto x = problem.feature(static_cast<std::size_t>(g));
    if (a(x) != b(x)) {
      throw std::logic_error(
          "leave-one-out factory failed the symmetry probe: scores depend on "
          "pool order");
    }
  }
}

}  // namespace

std::vector<double> jackknife_loo_scores(const TestingProblem& problem,
                                         const CalibrationSet& calibration,
                                         const LeaveOneOutFactory& factory) {
  calibration.validate(problem);
  std::vector<int> members = calibration.indices;
  for (int j : problem.test_indices()) members.push_back(j);

  std::vector<double> own(members.size());
  bool probed = false;
  for (std::size_t k = 0; k < members.size(); ++k) {
    std::vector<int> pool;
    pool.reserve(members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i != k) pool.push_back(members[i]);
    }
    if (!probed) {
      probe_loo_factory(problem, pool, factory);
      probed = true;
    }
    ScoreModel model = factory(pool);
    own[k] = model(problem.feature(static_cast<std::size_t>(members[k])));
  }
  return own;
}

PValueVector jackknife_pvalues(const TestingProblem& problem,
                               const CalibrationSet& calibration,
                               const LeaveOneOutFactory& factory) {
  auto own = jackknife_loo_scores(problem, calibration, factory);
  std::size_t c = calibration.size();
  std::span<const double> calib_scores(own.data(), c);
  std::span<const double> test_scores(own.data() + c, problem.m());

  PValueVector out;
  out.reduction = ReductionTag::jackknife;
  out.values.resize(problem.m());
  for (std::size_t j = 0; j < problem.m(); ++j) {
    std::size_t count = 1;  // self comparison
    for (double s : calib_scores) count += (test_scores[j] <= s);
    out.values[j] = static_cast<double>(count) / static_cast<double>(c + 1);
  }
  return out;
}

JackknifeCcInputs jackknife_cc_inputs(std::span<const double> scores_calib,
                                      std::span<const double> scores_test) {
  std::size_t c = scores_calib.size();
  std::size_t m = scores_test.size();
  std::vector<double> sorted_calib(scores_calib.begin(), scores_calib.end());
  std::sort(sorted_calib.begin(), sorted_calib.end());

  JackknifeCcInputs out;
  out.pvalues.resize(m);
  out.modified.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    out.pvalues[j] =
        static_cast<double>(count_at_or_above(sorted_calib, scores_test[j]) + 1) /
        static_cast<double>(c + 1);
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      std::size_t count = count_at_or_above(sorted_calib, scores_test[l]) +
                          (scores_test[l] <= scores_test[j] ? 1 : 0);
      out.modified[j][l] =
          static_cast<double>(count) / static_cast<double>(c + 1);
    }
  }
  return out;
}

double pvalue_pseudolabel(const TestingProblem& problem,
                          const CalibrationSet& c01, int j_global,
                          const ScoreModel& label_monotone_model) {
  if (!label_monotone_model.has_label_argument()) {
    throw std::logic_error("pseudo-label p-value needs a model with a label argument");
  }
  if (!problem.is_test_index(static_cast<std::size_t>(j_global))) {
    throw std::domain_error("j must be a test index");
  }
  c01.validate(problem, /*allow_nonnull=*/true);

  double sj = label_monotone_model(
      problem.feature(static_cast<std::size_t>(j_global)), 0);
  std::size_t count = 1;  // self term
  for (int i : c01.indices) {
    int pseudo_label = problem.is_nonnull_index(static_cast<std::size_t>(i)) ? 1 : 0;
    double si = label_monotone_model(problem.feature(static_cast<std::size_t>(i)),
                                     pseudo_label);
    count += (sj <= si);
  }
  return static_cast<double>(count) / static_cast<double>(c01.size() + 1);
}

}  // namespace ecot
