#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ecot::rng {

// SplitMix64 output function.
constexpr std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// FNV-1a over a string tag, for naming substreams.
constexpr std::uint64_t tag(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Derives the key of an independent child stream from a parent key and a
// label. Children with distinct labels have unrelated sequences.
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t label) {
  return mix(key ^ mix(label + 0xD1B54A32D192ED03ULL));
}

constexpr std::uint64_t derive(std::uint64_t key, std::string_view name,
                               std::uint64_t index = 0) {
  return derive(key, tag(name) + index * kGamma);
}

// Counter-based generator: output i of stream k is mix(k + (i+1)*kGamma),
// i.e. the SplitMix64 sequence seeded at k. Gaussians use Box-Muller on
// consecutive outputs (the second variate of a pair is cached).
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on [0,1) with 53 significant bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_uniform();  // (0,1]
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ecot::rng
