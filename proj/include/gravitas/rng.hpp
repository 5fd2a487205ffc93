#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gravitas {

// Seeded random stream with fixed, portable sampling transforms.
// std::mt19937_64 raw output is specified bit-for-bit by the standard, and all
// conversions below are written out explicitly, so a seed reproduces the same
// sequence on every platform. The distribution helpers of <random> are
// deliberately avoided (their algorithms are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Rejection sampling keeps the result unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller; the second variate is discarded so the
  // stream position stays a pure function of the call count.
  double normal(double mean, double stddev) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double two_pi = 6.283185307179586476925286766559;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    return mean + stddev * z;
  }

  // Index draw over categorical weights (need not be normalized).
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = uniform01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gravitas
