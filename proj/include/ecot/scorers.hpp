#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecot/core.hpp"

namespace ecot {

// Symmetry class a fitted score function declares. The reduced p-value
// formulas are only valid for the symmetry the scorer actually has, so
// fitting code keeps these honest (refits on permuted pools must be
// bit-identical; the test suite checks that).
enum class Symmetry {
  general,
  calibration_symmetric,
  joint_symmetric,   // implies calibration_symmetric
  jackknife_type,
  label_monotone,
};

std::string to_string(Symmetry s);
bool is_calibration_symmetric(Symmetry s);

struct LearnerConfig {
  std::string name = "logistic";  // logistic | lda | knn | kde
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const;

  static LearnerConfig logistic() { return {"logistic", {}}; }
  static LearnerConfig lda() { return {"lda", {}}; }
  static LearnerConfig knn() { return {"knn", {}}; }
  static LearnerConfig kde() { return {"kde", {}}; }

  std::string describe() const;
};

// Immutable fitted score function. Evaluation is deterministic; models are
// safe to share across threads.
class ScoreModel {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using LabeledEvalFn = std::function<double(std::span<const double>, int)>;

  ScoreModel() = default;
  ScoreModel(EvalFn eval, Symmetry symmetry, std::string fit_spec)
      : eval_(std::move(eval)), symmetry_(symmetry), fit_spec_(std::move(fit_spec)) {}

  // Label-monotone model: evaluate(x,0) >= evaluate(x,1) for all x.
  static ScoreModel labeled(LabeledEvalFn eval, std::string fit_spec);

  double operator()(std::span<const double> x) const;
  double operator()(std::span<const double> x, int label) const;

  bool has_label_argument() const { return static_cast<bool>(labeled_eval_); }
  Symmetry symmetry() const { return symmetry_; }
  const std::string& fit_spec() const { return fit_spec_; }

  const std::optional<std::vector<double>>& linear_weights() const {
    return linear_weights_;
  }
  void set_linear_weights(std::vector<double> w) { linear_weights_ = std::move(w); }

 private:
  EvalFn eval_;
  LabeledEvalFn labeled_eval_;
  Symmetry symmetry_ = Symmetry::general;
  std::string fit_spec_;
  std::optional<std::vector<double>> linear_weights_;
};

// Flips the sign of a model's scores, keeping its symmetry tag.
ScoreModel negated(ScoreModel model);

// Number of learner fits performed so far (process-wide). The cheap-method
// contracts assert on deltas of this.
std::uint64_t fit_count();
void reset_fit_count();

// Binary classification score: fitted probability of membership in class1.
// Fitting canonicalizes each class pool by content, so the result does not
// depend on row order. Degenerate input (every row identical across both
// classes) falls back to the constant 0.5 score, flagged in fit_spec().
ScoreModel fit_binary(const Matrix& class0, const Matrix& class1,
                      const LearnerConfig& spec,
                      Symmetry tag = Symmetry::joint_symmetric);

// One-class non-conformity score; larger means more anomalous relative to
// the pool. Built-ins: "knn" (mean distance to the k nearest pool points,
// k = ceil(sqrt(pool size)) by default) and "kde" (negative Gaussian kernel
// density, bandwidth = median pairwise distance by default).
ScoreModel fit_one_class(const Matrix& pool, const LearnerConfig& spec,
                         Symmetry tag = Symmetry::joint_symmetric);

// Shared state for the per-test-point integrative ratio scores: one-class
// models s0 (on the nulls plus the test pool) and s1 (on a split-off half of
// the labeled non-nulls), plus the rank maps that turn them into the ratio
// u0j/u1. The rank maps need scores oriented so that larger means more
// typical of the pool; the one-class learners report the opposite, so their
// outputs enter negated.
class IntegrativeScorer {
 public:
  IntegrativeScorer(const TestingProblem& problem, std::uint64_t split_seed,
                    const LearnerConfig& one_class_spec,
                    double split_fraction = 0.5);

  // Calibration-symmetric ratio score for test point j (global index).
  ScoreModel for_test_point(int j_global) const;

  double s0_value(std::span<const double> x) const;
  double s1_value(std::span<const double> x) const;

  // u0 rank map over the labeled nulls plus test point j, given
  // s0 values of the query and of X_j.
  double u0(double s0_x, double s0_at_j) const;
  // u1 rank map over the training half of the labeled non-nulls.
  double u1(double s1_x) const;

  double ratio(double s0_x, double s1_x, double s0_at_j) const {
    return u0(s0_x, s0_at_j) / u1(s1_x);
  }

  // Precomputed s0/s1 values at the labeled null rows and the test rows.
  const std::vector<double>& s0_at_nulls() const;
  const std::vector<double>& s0_at_tests() const;
  const std::vector<double>& s1_at_nulls() const;
  const std::vector<double>& s1_at_tests() const;

  const std::vector<int>& train_nonnull_indices() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

// One-call form of the above for a single test point.
ScoreModel fit_integrative(const TestingProblem& problem, int j_global,
                           std::uint64_t split_seed,
                           const LearnerConfig& one_class_spec,
                           double split_fraction = 0.5);

struct LocalizedConfig {
  double bandwidth = 1.0;        // Gaussian kernel bandwidth, must be > 0
  double train_fraction = 0.5;   // share of labeled nulls used to train the base score
  std::uint64_t split_seed = 0;
  LearnerConfig base = LearnerConfig::knn();
};

struct LocalizedFit {
  ScoreModel model;              // calibration-symmetric
  std::vector<int> calibration;  // global indices of the held-out nulls
};

// Kernel-localized rank score: S_j(x) = sum_i H(X_i,x) 1{S(x) >= S(X_i)} /
// sum_i H(X_i,x) over the calibration nulls plus X_j. If every kernel weight
// underflows to zero the score falls back to the unweighted rank.
LocalizedFit fit_localized(const TestingProblem& problem, int j_global,
                           const LocalizedConfig& config);

// Closed-form density-ratio score for the N(0,I) vs N(mu,I) scenario with
// null proportion pi. Test-suite reference only. pi = 1 is degenerate and
// rejected.
ScoreModel oracle_gaussian_ratio(std::vector<double> mu, double pi);

// Splits `indices` into (train, rest) by seeded shuffle; train gets
// round(fraction * size), clamped so both parts are non-empty.
std::pair<std::vector<int>, std::vector<int>> split_indices(
    std::vector<int> indices, double fraction, std::uint64_t seed);

}  // namespace ecot
