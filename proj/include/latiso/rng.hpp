#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace latiso {

/// Seedable generator used throughout the library. All stochastic routines
/// take one explicitly, so results are a pure function of (inputs, seed).
///
/// Normal variates are produced by the Marsaglia polar method rather than
/// std::normal_distribution, whose output is implementation-defined; this
/// keeps streams identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), gen_(mix(seed)) {}

  /// Independent stream keyed off the root seed and an index. Children do
  /// not depend on how much the parent has consumed, so parallel workers
  /// can derive replicate streams in any order.
  Rng child(std::uint64_t index) const { return Rng(mix(root_ ^ mix(index + 0x51ed2701a0b8d2e5ULL))); }

  std::uint64_t root_seed() const { return root_; }

  std::uint64_t bits() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased via rejection. Requires n >= 1.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t bound = max - max % n;  // largest multiple of n representable, minus n if exact
    std::uint64_t x = gen_();
    while (x >= bound && bound != 0) x = gen_();
    return x % n;
  }

  bool coin() { return (gen_() >> 63) != 0; }

  /// Standard normal draw (Marsaglia polar, one spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t root_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace latiso
