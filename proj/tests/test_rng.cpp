#include <doctest.h>

#include <cmath>
#include <vector>

#include "ecot/rng.hpp"

using namespace ecot;

TEST_CASE("streams are deterministic and label-separated") {
  rng::Stream a(rng::derive(1, "x"));
  rng::Stream b(rng::derive(1, "x"));
  rng::Stream c(rng::derive(1, "y"));
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    auto va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("indexed labels give distinct streams") {
  rng::Stream a(rng::derive(9, "rep", 0));
  rng::Stream b(rng::derive(9, "rep", 1));
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("uniforms live in [0,1)") {
  rng::Stream s(123);
  for (int i = 0; i < 1000; ++i) {
    double u = s.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian moments") {
  rng::Stream s(77);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = s.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("next_below is in range and covers values") {
  rng::Stream s(5);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 700; ++i) {
    auto v = s.next_below(7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  for (int count : seen) CHECK(count > 0);
}

TEST_CASE("shuffle is a permutation") {
  rng::Stream s(11);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  auto original = v;
  s.shuffle(v);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == original);
}
