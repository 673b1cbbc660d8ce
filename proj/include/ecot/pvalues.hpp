#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ecot/core.hpp"
#include "ecot/scorers.hpp"

namespace ecot {

// #{c in sorted : s <= c}
std::size_t count_at_or_above(std::span<const double> sorted, double s);

// Lower median: for even sizes, the lower of the two central order
// statistics, so the result is always an attained value.
double lower_median(std::vector<double> values);

// p = #{i in C u {j} : s_j <= s_i} / (|C|+1). The self term always counts,
// so the result lies in {1/(|C|+1), ..., 1}.
double pvalue_reduced_calibration_symmetric(
    std::span<const double> scores_on_c_and_j, std::size_t j_position);

// Same arithmetic with a single shared score function evaluated at the
// calibration points and the test point. The model must carry the
// joint-symmetric tag.
double pvalue_joint_symmetric(const ScoreModel& model,
                              const TestingProblem& problem,
                              const CalibrationSet& calibration, int j_global);

// Modified p-values under calibration symmetry. `test_scores` holds
// S_j(X_l) for every test offset l; `calib_scores_with_j` holds S_j at the
// calibration points plus S_j(X_j) (in any order). Entry j of the output is
// exactly 0. With `add_one`, numerator and denominator both gain 1.
std::vector<double> modified_pvalues_reduced(
    std::span<const double> test_scores,
    std::span<const double> calib_scores_with_j, std::size_t j_offset,
    bool add_one = false);

// ---------------------------------------------------------------------------
// Full-permutation machinery. Used by the brute-force oracle and anywhere a
// score function has no exploitable symmetry.

// Permutations of the free index set (calibration indices plus one test
// index); everything else stays fixed. Enumeration is lexicographic over
// arrangements of the sorted free indices.
class PermutationFamily {
 public:
  static constexpr int kDefaultCap = 8;

  PermutationFamily(std::vector<int> free_indices, int cap = kDefaultCap);

  const std::vector<int>& free_indices() const { return free_; }
  std::size_t size() const;  // |free|!

  // visit(arrangement): arrangement[i] is the global index whose row now
  // occupies slot free_indices()[i]. The first visit is the identity.
  void for_each(const std::function<void(const std::vector<int>&)>& visit) const;

 private:
  std::vector<int> free_;
};

// Problem with the free slots rearranged: slot g holds the row of sigma(g).
class PermView {
 public:
  PermView(const TestingProblem& problem, const std::vector<int>& slots,
           const std::vector<int>& arrangement);

  static PermView identity(const TestingProblem& problem);

  int sigma(int global) const;
  std::span<const double> feature(int global) const {
    return problem_->feature(static_cast<std::size_t>(sigma(global)));
  }
  const TestingProblem& problem() const { return *problem_; }

 private:
  const TestingProblem* problem_;
  std::vector<int> slots_;        // sorted
  std::vector<int> arrangement_;  // parallel to slots_
};

// Rebuilds the score function for test point j from a permuted arrangement
// of the data.
using ScoreFactory = std::function<ScoreModel(const PermView&, int j_global)>;

struct FullPermutationResult {
  double pvalue = 1.0;
  std::vector<double> modified;  // over test offsets; entry j is 0
};

// One pass over all permutations, producing both the p-value and the
// modified p-values (via the per-point lower-median stabilized score).
FullPermutationResult full_permutation_ecot_inputs(
    const TestingProblem& problem, const CalibrationSet& calibration,
    int j_global, const ScoreFactory& factory,
    int cap = PermutationFamily::kDefaultCap);

double pvalue_full_permutation(const TestingProblem& problem,
                               const CalibrationSet& calibration, int j_global,
                               const ScoreFactory& factory,
                               int cap = PermutationFamily::kDefaultCap);

std::vector<double> modified_pvalues_full(
    const TestingProblem& problem, const CalibrationSet& calibration,
    int j_global, const ScoreFactory& factory,
    int cap = PermutationFamily::kDefaultCap);

// ---------------------------------------------------------------------------
// Jackknife (leave-one-out) p-values.

// Builds a score function from the pool of rows at the given global indices;
// the result must not depend on the order of that list.
using LeaveOneOutFactory =
    std::function<ScoreModel(const std::vector<int>& pool_indices)>;

// Leave-one-out own scores S_k = S_k(X_k) for k in C then U (|C|+m fits).
// Probes the factory for order sensitivity first and throws on violation.
std::vector<double> jackknife_loo_scores(const TestingProblem& problem,
                                         const CalibrationSet& calibration,
                                         const LeaveOneOutFactory& factory);

PValueVector jackknife_pvalues(const TestingProblem& problem,
                               const CalibrationSet& calibration,
                               const LeaveOneOutFactory& factory);

struct JackknifeCcInputs {
  std::vector<double> pvalues;                 // over test offsets
  std::vector<std::vector<double>> modified;   // [j][l]
};

// Conditional-calibration ingredients built from the leave-one-out scores
// (calibration part first, then test part).
JackknifeCcInputs jackknife_cc_inputs(std::span<const double> scores_calib,
                                      std::span<const double> scores_test);

// ---------------------------------------------------------------------------
// Pseudo-label p-values: the calibration set may contain labeled non-nulls;
// labeled points keep their labels, the test point gets pseudo-label 0. The
// model must take a label argument and be monotone in it.
double pvalue_pseudolabel(const TestingProblem& problem,
                          const CalibrationSet& c01, int j_global,
                          const ScoreModel& label_monotone_model);

}  // namespace ecot
