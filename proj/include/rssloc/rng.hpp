#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rssloc {

/// SplitMix64 step; used for seed derivation and stream mixing.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed mix: independent substreams from a master seed.
/// Adding salts never perturbs streams derived with other salts.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t salt, std::uint64_t counter) {
  return splitmix64(splitmix64(master ^ splitmix64(salt)) ^ counter);
}

/// Seeded random stream with documented deterministic transforms.
///
/// Raw bits come from std::mt19937_64 (fully specified by the standard, so
/// bit-reproducible across platforms). Derived draws:
///   uniform01:  (raw >> 11) * 2^-53                 in [0, 1)
///   gaussian:   Box-Muller, u1 = ((raw >> 11)+1) * 2^-53 in (0, 1],
///               z = sqrt(-2 ln u1) * cos(2*pi*u2)
/// Each gaussian() consumes exactly two raw draws (the sine companion is
/// discarded) so stream positions are easy to reason about in tests.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  /// Index in [0, n). n must be >= 1. Derived as floor(uniform01 * n),
  /// clamped to n-1 so the documented draw order stays one raw per index.
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i >= n ? n - 1 : i;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rssloc
