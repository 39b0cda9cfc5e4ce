#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rotgrad {

// Splittable counter-based generator: output i is a SplitMix64 hash of
// (key, i). split() derives an independent stream keyed by a label, so every
// consumer of randomness can be traced back to one user seed.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  CounterRng split(std::uint64_t label) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(label + 0xbb67ae8584caa73bULL));
    return child;
  }

  // The standard distributions are implementation-defined, so both are
  // written out to keep seeded streams identical across standard libraries.

  /// Uniform on [lo, hi) from the top 53 bits of one draw.
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>((*this)() >> 11) * 0x1.0p-53);
  }

  /// Standard normal by Box-Muller; consumes two draws.
  double normal() {
    const double u1 = static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rotgrad
