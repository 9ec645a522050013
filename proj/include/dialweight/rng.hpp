#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dialweight {

// Seeded random source. Only the raw 64-bit engine output is used; the
// uniform and integer draws below are computed here rather than through
// <random> distributions so that streams are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent seed for a named component from a top-level seed,
// e.g. derive_seed(seed, "shuffle").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace dialweight
