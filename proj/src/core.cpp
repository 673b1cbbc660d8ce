#include "ecot/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace ecot {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) {
      throw std::invalid_argument("from_rows: ragged input at row " +
                                  std::to_string(i));
    }
    m.set_row(i, rows[i]);
  }
  return m;
}

void Matrix::set_row(std::size_t i, std::span<const double> values) {
  if (values.size() != cols_) {
    throw std::invalid_argument("set_row: wrong width");
  }
  std::copy(values.begin(), values.end(), data_.begin() + i * cols_);
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("vstack: column mismatch");
  }
  Matrix out(a.rows() + b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) out.set_row(i, a.row(i));
  for (std::size_t i = 0; i < b.rows(); ++i) out.set_row(a.rows() + i, b.row(i));
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& order) {
  Matrix out(order.size(), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) out.set_row(i, m.row(order[i]));
  return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<std::size_t> canonical_row_order(const Matrix& m) {
  std::vector<std::uint64_t> hashes(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    hashes[i] = fnv1a64(r.data(), r.size_bytes());
  }
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    auto ra = m.row(a);
    auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(),
                                        rb.end());
  });
  return order;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() == 1) return xs[0];
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TestingProblem::TestingProblem(Matrix null_features, Matrix nonnull_features,
                               Matrix test_features)
    : null_(std::move(null_features)),
      nonnull_(std::move(nonnull_features)),
      test_(std::move(test_features)) {
  if (null_.empty()) throw std::invalid_argument("need at least one labeled null");
  if (test_.empty()) throw std::invalid_argument("need at least one test point");
  std::size_t d = null_.cols();
  if (test_.cols() != d || (!nonnull_.empty() && nonnull_.cols() != d)) {
    throw std::invalid_argument("feature dimension mismatch across datasets");
  }
  for (auto* mat : {&null_, &nonnull_, &test_}) {
    for (std::size_t i = 0; i < mat->rows(); ++i) {
      for (double v : mat->row(i)) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("non-finite feature value");
        }
      }
    }
  }
}

std::span<const double> TestingProblem::feature(std::size_t g) const {
  if (g < n0()) return null_.row(g);
  if (g < n()) return nonnull_.row(g - n0());
  if (g < total()) return test_.row(g - n());
  throw std::domain_error("global index out of range");
}

std::vector<int> TestingProblem::null_indices() const {
  std::vector<int> v(n0());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<int> TestingProblem::nonnull_indices() const {
  std::vector<int> v(n1());
  std::iota(v.begin(), v.end(), static_cast<int>(n0()));
  return v;
}

std::vector<int> TestingProblem::test_indices() const {
  std::vector<int> v(m());
  std::iota(v.begin(), v.end(), static_cast<int>(n()));
  return v;
}

CalibrationSet CalibrationSet::all_nulls(const TestingProblem& problem) {
  return CalibrationSet{problem.null_indices()};
}

void CalibrationSet::validate(const TestingProblem& problem,
                              bool allow_nonnull) const {
  std::unordered_set<int> seen;
  for (int g : indices) {
    if (g < 0 || !seen.insert(g).second) {
      throw std::invalid_argument("calibration set has duplicate or negative index");
    }
    auto gg = static_cast<std::size_t>(g);
    bool ok = problem.is_null_index(gg) ||
              (allow_nonnull && problem.is_nonnull_index(gg));
    if (!ok) {
      throw std::invalid_argument("calibration index outside permitted label set");
    }
  }
}

std::string to_string(ReductionTag tag) {
  switch (tag) {
    case ReductionTag::full_permutation: return "full-permutation";
    case ReductionTag::calibration_symmetric: return "calibration-symmetric";
    case ReductionTag::joint_symmetric: return "joint-symmetric";
    case ReductionTag::jackknife: return "jackknife";
    case ReductionTag::pseudo_label: return "pseudo-label";
  }
  return "?";
}

FdpPower fdp_and_power(const std::vector<int>& rejected,
                       const std::vector<int>& true_labels,
                       std::size_t first_test_index) {
  std::size_t m = true_labels.size();
  std::size_t false_rejections = 0;
  std::size_t true_rejections = 0;
  for (int g : rejected) {
    if (g < static_cast<int>(first_test_index) ||
        g >= static_cast<int>(first_test_index + m)) {
      throw std::domain_error("rejected index outside the test range");
    }
    std::size_t j = static_cast<std::size_t>(g) - first_test_index;
    if (true_labels[j] == 0) {
      ++false_rejections;
    } else {
      ++true_rejections;
    }
  }
  std::size_t nonnulls = 0;
  for (int y : true_labels) nonnulls += (y != 0);
  FdpPower out;
  out.fdp = static_cast<double>(false_rejections) /
            static_cast<double>(std::max<std::size_t>(1, rejected.size()));
  out.tpp = static_cast<double>(true_rejections) /
            static_cast<double>(std::max<std::size_t>(1, nonnulls));
  return out;
}

MonteCarloReport MonteCarloReport::aggregate(std::vector<FdpPower> per_replicate) {
  MonteCarloReport rep;
  rep.replicates = static_cast<int>(per_replicate.size());
  rep.per_replicate = std::move(per_replicate);
  if (rep.replicates == 0) return rep;
  double nf = static_cast<double>(rep.replicates);
  double fsum = 0.0, tsum = 0.0;
  for (const auto& r : rep.per_replicate) {
    fsum += r.fdp;
    tsum += r.tpp;
  }
  rep.fdr_mean = fsum / nf;
  rep.power_mean = tsum / nf;
  if (rep.replicates > 1) {
    double fvar = 0.0, tvar = 0.0;
    for (const auto& r : rep.per_replicate) {
      fvar += (r.fdp - rep.fdr_mean) * (r.fdp - rep.fdr_mean);
      tvar += (r.tpp - rep.power_mean) * (r.tpp - rep.power_mean);
    }
    fvar /= nf - 1.0;
    tvar /= nf - 1.0;
    rep.fdr_se = std::sqrt(fvar / nf);
    rep.power_se = std::sqrt(tvar / nf);
  }
  return rep;
}

}  // namespace ecot
