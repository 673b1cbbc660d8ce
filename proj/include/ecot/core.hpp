#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecot/matrix.hpp"

namespace ecot {

// The three-dataset testing problem. Samples live in one contiguous global
// index space [0, n0+n1+m): labeled nulls first, then labeled non-nulls,
// then the unlabeled test points.
//
//   L0 = [0, n0)    labeled null
//   L1 = [n0, n)    labeled non-null (may be empty)
//   U  = [n, n+m)   test
class TestingProblem {
 public:
  TestingProblem(Matrix null_features, Matrix nonnull_features,
                 Matrix test_features);

  const Matrix& null_features() const { return null_; }
  const Matrix& nonnull_features() const { return nonnull_; }
  const Matrix& test_features() const { return test_; }

  std::size_t n0() const { return null_.rows(); }
  std::size_t n1() const { return nonnull_.rows(); }
  std::size_t n() const { return n0() + n1(); }
  std::size_t m() const { return test_.rows(); }
  std::size_t total() const { return n() + m(); }
  std::size_t dim() const { return null_.cols(); }

  // Feature row for a global index.
  std::span<const double> feature(std::size_t g) const;

  bool is_null_index(std::size_t g) const { return g < n0(); }
  bool is_nonnull_index(std::size_t g) const { return g >= n0() && g < n(); }
  bool is_test_index(std::size_t g) const { return g >= n() && g < total(); }

  std::vector<int> null_indices() const;
  std::vector<int> nonnull_indices() const;
  std::vector<int> test_indices() const;

  // Global index of local test offset j in [0, m).
  int test_index(std::size_t j) const { return static_cast<int>(n() + j); }

 private:
  Matrix null_;
  Matrix nonnull_;
  Matrix test_;
};

// Ordered list of calibration indices. For the standard p-value families
// these must all be labeled nulls; the pseudo-label family also admits
// labeled non-nulls.
struct CalibrationSet {
  std::vector<int> indices;

  static CalibrationSet all_nulls(const TestingProblem& problem);

  std::size_t size() const { return indices.size(); }

  // Throws std::invalid_argument on duplicates or indices outside the
  // permitted label set.
  void validate(const TestingProblem& problem, bool allow_nonnull = false) const;
};

enum class ReductionTag {
  full_permutation,
  calibration_symmetric,
  joint_symmetric,
  jackknife,
  pseudo_label,
};

std::string to_string(ReductionTag tag);

struct PValueVector {
  std::vector<double> values;  // one per test point, each in (0, 1]
  ReductionTag reduction = ReductionTag::calibration_symmetric;
};

// Output of a testing procedure. Index sets hold global test indices.
struct RejectionReport {
  std::vector<int> rejected;
  std::vector<int> r_init;
  std::vector<int> r_j_sizes;  // per local test offset; empty for plain BH runs
  bool pruned = false;
  std::optional<double> null_prop_estimate;
  std::uint64_t seed = 0;
};

struct FdpPower {
  double fdp = 0.0;
  double tpp = 0.0;
};

// False discovery proportion and true positive proportion of a rejection
// set. `rejected` holds global test indices; `true_labels` has one 0/1 entry
// per test point; `first_test_index` is the global index of test offset 0.
// Empty rejection sets report fdp = 0 (the 1-or-|R| guard).
FdpPower fdp_and_power(const std::vector<int>& rejected,
                       const std::vector<int>& true_labels,
                       std::size_t first_test_index = 0);

struct MonteCarloReport {
  int replicates = 0;
  double fdr_mean = 0.0;
  double fdr_se = 0.0;
  double power_mean = 0.0;
  double power_se = 0.0;
  std::vector<FdpPower> per_replicate;

  static MonteCarloReport aggregate(std::vector<FdpPower> per_replicate);
};

}  // namespace ecot
