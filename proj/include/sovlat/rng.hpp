/**
 * @file rng.hpp
 * @brief Deterministic seed splitting.
 *
 * Every random draw descends from the single configuration seed. A named
 * stream uses sub_seed(seed, name) = splitmix64(seed ^ fnv1a64(name)); retry r
 * of a stream uses splitmix64(sub_seed + r).
 */
#pragma once

#include "sovlat/types.hpp"

#include <random>
#include <string_view>

namespace sovlat {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view name, int retry = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a64(name)) + static_cast<std::uint64_t>(retry));
}

/// Thin wrapper so that draws do not depend on distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (double(eng_() >> 11) * 0x1.0p-53);
  }

  /// Point with modulus uniform in [rmin, rmax] and uniform phase.
  cx annulus(double rmin = 0.5, double rmax = 2.0) {
    const double r = uniform(rmin, rmax);
    const double th = uniform(0.0, 2.0 * kPi);
    return std::polar(r, th);
  }

  int integer(int n) { return int(eng_() % std::uint64_t(n)); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sovlat
