#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace socgcf {

// Derives an independent stream seed from a root seed and a purpose label,
// so components (init, sampling, ...) can be reproduced in isolation.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// Deterministic RNG. The engine is the standardized mt19937_64; all
// distributions are hand-rolled on top of its raw output so that streams are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Unbiased integer in [0, bound), bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller normal deviate.
  double next_gaussian(double mean, double stddev);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace socgcf
