#include <doctest.h>

#include <algorithm>

#include "ecot/core.hpp"
#include "ecot/rng.hpp"

using namespace ecot;

namespace {

TestingProblem tiny_problem(std::size_t n0, std::size_t n1, std::size_t m,
                            std::size_t d = 2) {
  rng::Stream stream(7);
  auto draw = [&](std::size_t rows) {
    Matrix mat(rows, d);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t c = 0; c < d; ++c) mat.at(i, c) = stream.next_gaussian();
    }
    return mat;
  };
  return TestingProblem(draw(n0), draw(n1), draw(m));
}

}  // namespace

TEST_CASE("index partition") {
  TestingProblem problem = tiny_problem(3, 2, 4);
  CHECK(problem.n0() == 3);
  CHECK(problem.n1() == 2);
  CHECK(problem.n() == 5);
  CHECK(problem.m() == 4);
  CHECK(problem.total() == 9);

  auto l0 = problem.null_indices();
  auto l1 = problem.nonnull_indices();
  auto u = problem.test_indices();
  CHECK(l0 == std::vector<int>{0, 1, 2});
  CHECK(l1 == std::vector<int>{3, 4});
  CHECK(u == std::vector<int>{5, 6, 7, 8});
  CHECK(problem.is_test_index(5));
  CHECK_FALSE(problem.is_test_index(4));
  CHECK(problem.test_index(0) == 5);
}

TEST_CASE("construction validation") {
  Matrix empty;
  Matrix one_row = Matrix::from_rows({{1.0, 2.0}});
  CHECK_THROWS_AS(TestingProblem(empty, empty, one_row), std::invalid_argument);
  CHECK_THROWS_AS(TestingProblem(one_row, empty, empty), std::invalid_argument);
  Matrix wrong_width = Matrix::from_rows({{1.0}});
  CHECK_THROWS_AS(TestingProblem(one_row, empty, wrong_width),
                  std::invalid_argument);
  Matrix with_nan = Matrix::from_rows({{1.0, std::nan("")}});
  CHECK_THROWS_AS(TestingProblem(one_row, empty, with_nan),
                  std::invalid_argument);
  // n1 = 0 is fine
  CHECK_NOTHROW(TestingProblem(one_row, empty, one_row));
}

TEST_CASE("calibration set validation") {
  TestingProblem problem = tiny_problem(3, 2, 2);
  CalibrationSet all = CalibrationSet::all_nulls(problem);
  CHECK(all.size() == 3);
  CHECK_NOTHROW(all.validate(problem));

  CalibrationSet dup{{0, 0}};
  CHECK_THROWS_AS(dup.validate(problem), std::invalid_argument);
  CalibrationSet nonnull{{3}};
  CHECK_THROWS_AS(nonnull.validate(problem), std::invalid_argument);
  CHECK_NOTHROW(nonnull.validate(problem, /*allow_nonnull=*/true));
  CalibrationSet test_idx{{5}};
  CHECK_THROWS_AS(test_idx.validate(problem, true), std::invalid_argument);
}

TEST_CASE("fdp and power examples") {
  // empty rejection set
  auto r = fdp_and_power({}, {0, 1, 0});
  CHECK(r.fdp == 0.0);
  CHECK(r.tpp == 0.0);

  // one false and one true rejection, one true non-null in total
  r = fdp_and_power({0, 1}, {0, 1, 0});
  CHECK(r.fdp == 0.5);
  CHECK(r.tpp == 1.0);

  // everything rejected, all labels null
  r = fdp_and_power({0, 1, 2}, {0, 0, 0});
  CHECK(r.fdp == 1.0);
  CHECK(r.tpp == 0.0);

  // global index offset
  r = fdp_and_power({10, 11}, {0, 1, 0}, 10);
  CHECK(r.fdp == 0.5);

  CHECK_THROWS_AS(fdp_and_power({3}, {0, 1, 0}), std::domain_error);
  CHECK_THROWS_AS(fdp_and_power({9}, {0, 1, 0}, 10), std::domain_error);
}

TEST_CASE("fdp bounds and permutation invariance") {
  rng::Stream stream(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t m = 1 + stream.next_below(10);
    std::vector<int> labels(m);
    for (auto& y : labels) y = static_cast<int>(stream.next_below(2));
    std::vector<int> rejected;
    for (std::size_t j = 0; j < m; ++j) {
      if (stream.next_below(2)) rejected.push_back(static_cast<int>(j));
    }
    auto r = fdp_and_power(rejected, labels);
    CHECK(r.fdp >= 0.0);
    CHECK(r.fdp <= 1.0);
    CHECK(r.tpp >= 0.0);
    CHECK(r.tpp <= 1.0);

    std::vector<int> shuffled = rejected;
    stream.shuffle(shuffled);
    auto r2 = fdp_and_power(shuffled, labels);
    CHECK(r.fdp == r2.fdp);
    CHECK(r.tpp == r2.tpp);
  }
}

TEST_CASE("monte carlo aggregation") {
  auto rep = MonteCarloReport::aggregate({{0.1, 0.5}, {0.3, 0.7}});
  CHECK(rep.replicates == 2);
  CHECK(rep.fdr_mean == doctest::Approx(0.2));
  CHECK(rep.power_mean == doctest::Approx(0.6));
  CHECK(rep.fdr_se == doctest::Approx(0.1));

  auto single = MonteCarloReport::aggregate({{0.25, 0.75}});
  CHECK(single.fdr_mean == 0.25);
  CHECK(single.power_mean == 0.75);
  CHECK(single.fdr_se == 0.0);
}

TEST_CASE("canonical row order is content-based") {
  Matrix a = Matrix::from_rows({{3.0, 1.0}, {1.0, 2.0}, {2.0, 0.0}});
  Matrix b = Matrix::from_rows({{2.0, 0.0}, {3.0, 1.0}, {1.0, 2.0}});
  Matrix ca = gather_rows(a, canonical_row_order(a));
  Matrix cb = gather_rows(b, canonical_row_order(b));
  REQUIRE(ca.rows() == cb.rows());
  for (std::size_t i = 0; i < ca.rows(); ++i) {
    auto ra = ca.row(i);
    auto rb = cb.row(i);
    CHECK(std::equal(ra.begin(), ra.end(), rb.begin()));
  }
}

TEST_CASE("pairwise sum deterministic") {
  std::vector<double> xs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  CHECK(pairwise_sum(xs) == pairwise_sum(xs));
  CHECK(pairwise_sum(xs) == doctest::Approx(2.8));
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}
