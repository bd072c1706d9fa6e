#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace lossylearn::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t kBlockTrials = 10000;

/// Generator for trial block `block` of a run seeded with `seed`.
inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(block + 1)));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Cumulative sums of a probability vector; from the last positive entry on it reads exactly 1,
/// so inverse-CDF draws never land on a zero-probability index.
inline std::vector<double> cumulative(std::span<const double> p) {
  std::vector<double> c(p.size());
  double s = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    c[i] = (s += p[i]);
    if (p[i] > 0.0) last = i;
  }
  for (std::size_t i = last; i < c.size(); ++i) c[i] = 1.0;
  return c;
}

inline std::size_t draw(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace lossylearn::detail
