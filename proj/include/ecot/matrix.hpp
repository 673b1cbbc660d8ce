#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ecot {

// Dense row-major matrix of doubles. Rows are feature vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void set_row(std::size_t i, std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Stacks a on top of b. Column counts must agree (or one side may be empty).
Matrix vstack(const Matrix& a, const Matrix& b);

// Gathers the given rows of m into a new matrix.
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& order);

// Canonical row order: indices sorted by (FNV-1a hash of the row bytes,
// then lexicographic row comparison). Fitting code reorders its input pool
// through this before any accumulation, so refits on permuted pools are
// bit-identical.
std::vector<std::size_t> canonical_row_order(const Matrix& m);

// Sum with a fixed binary-tree reduction order. Used for unordered-pool
// sums whose result must not depend on the caller's row order.
double pairwise_sum(std::span<const double> xs);

double squared_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

std::uint64_t fnv1a64(const void* data, std::size_t n);

}  // namespace ecot
