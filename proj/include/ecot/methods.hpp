#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ecot/core.hpp"
#include "ecot/procedures.hpp"
#include "ecot/scorers.hpp"

namespace ecot {

// Recognized method names: ecot-bi, ecot-oc, ecot-as, cp-oc, cp-bi,
// adadetect, fullnd, integ.
struct MethodSpec {
  std::string name = "ecot-bi";
  LearnerConfig binary_learner = LearnerConfig::logistic();
  LearnerConfig one_class_learner = LearnerConfig::knn();
  double split_fraction = 0.5;  // D0/D1 training share for split-based methods
  double alpha = 0.1;
  std::uint64_t seed = 0;
  std::string null_prop = "none";  // none | storey | label-assisted
  double storey_lambda = 0.5;
  // The binary-classifier path collapses to plain BH; this switches it to
  // the conditional-calibration route for cross-checking.
  bool use_conditional_calibration = false;
};

bool is_known_method(const std::string& name);

// Minimum labeled non-null count the method needs (0 when D1 is unused).
std::size_t method_min_nonnulls(const MethodSpec& spec);

// Throws std::invalid_argument when the problem cannot support the method.
void validate_method(const TestingProblem& problem, const MethodSpec& spec);

struct MethodOutput {
  RejectionReport report;
  std::vector<double> pvalues;      // raw conformal p-values per test offset
  std::vector<double> test_scores;  // own-point score per test offset
};

MethodOutput run_method_detailed(const TestingProblem& problem,
                                 const MethodSpec& spec);
RejectionReport run_method(const TestingProblem& problem, const MethodSpec& spec);

RejectionReport run_ecot_bi(const TestingProblem& problem, const MethodSpec& spec);
RejectionReport run_ecot_oc(const TestingProblem& problem, const MethodSpec& spec);

// A candidate approach for adaptive selection: fills the scores S_jk at the
// calibration nulls (size n0) and at the test points (size m, entry j being
// the own-point score). Joint-symmetric candidates are queried once.
struct Candidate {
  std::string name;
  Symmetry symmetry = Symmetry::calibration_symmetric;
  std::function<void(std::size_t j, std::vector<double>& calib,
                     std::vector<double>& test)>
      scores_for;
};

// The default candidate set: the binary-classifier score, the integrative
// ratio score, and the pooled one-class score, all calibrated on L0.
std::vector<Candidate> default_candidates(const TestingProblem& problem,
                                          const MethodSpec& spec);

// Adjusted adaptive approach selection: per test point, the candidate whose
// modified p-values yield the most BH rejections is selected (ties break to
// the smallest index), and conditional calibration runs with the selected
// scores.
RejectionReport run_ecot_as(const TestingProblem& problem, const MethodSpec& spec,
                            const std::vector<Candidate>& candidates);

// Joint-symmetric selection: picks argmax of the rank-based criterion M_k
// and runs plain BH with the winner.
double joint_selection_criterion(const TestingProblem& problem,
                                 const ScoreModel& model);
RejectionReport run_ecot_as_joint(const TestingProblem& problem,
                                  const MethodSpec& spec,
                                  const std::vector<ScoreModel>& candidates);

// Baselines: cp-oc, cp-bi, adadetect, fullnd, integ (per spec.name).
RejectionReport run_baseline(const TestingProblem& problem, const MethodSpec& spec);

// Unadjusted select-then-test: picks the candidate with the most BH
// rejections and reuses its p-values directly. Kept only to demonstrate the
// FDR inflation that the adjusted selection avoids.
RejectionReport run_naive_selection(const TestingProblem& problem,
                                    const MethodSpec& spec,
                                    const std::vector<Candidate>& candidates);

// Split-conformal p-values from score arrays: p_j = (1 + #{i : s_test[j] <=
// s_calib[i]}) / (|calib|+1).
std::vector<double> split_conformal_pvalues(const std::vector<double>& calib_scores,
                                            const std::vector<double>& test_scores);

}  // namespace ecot
