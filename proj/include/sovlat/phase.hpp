/**
 * @file phase.hpp
 * @brief Root-of-unity data q = exp(-i pi p'/p) with p odd and p' even.
 */
#pragma once

#include "sovlat/types.hpp"

#include <numeric>

namespace sovlat {

struct Phase {
  int p = 3;
  int p_prime = 2;
  int l = 1;
  cx q;
  cx q_half;

  static Phase make(int p, int p_prime) {
    if (p < 3 || p % 2 == 0)
      throw ConfigError("p must be odd and >= 3 (q = exp(-i pi p'/p) needs p = 2l+1 odd); got p = " +
                        std::to_string(p));
    if (p_prime <= 0 || p_prime % 2 != 0)
      throw ConfigError("p' must be a positive even integer; got p' = " + std::to_string(p_prime));
    if (std::gcd(p, p_prime) != 1)
      throw ConfigError("p and p' must be co-prime; got gcd = " + std::to_string(std::gcd(p, p_prime)));
    Phase ph;
    ph.p = p;
    ph.p_prime = p_prime;
    ph.l = (p - 1) / 2;
    ph.q = std::exp(-I * kPi * double(p_prime) / double(p));
    ph.q_half = std::exp(-I * kPi * double(p_prime) / (2.0 * p));
    return ph;
  }

  /// q^k, exact periodicity q^p = 1 used to keep exponents small.
  cx qpow(int k) const { return std::exp(-I * kPi * double(p_prime) * double(mod(k, p)) / double(p)); }

  /// Index k in Z_p with base^k closest to ratio.
  static int nearest_power(cx ratio, cx base, int p, double tol = 1e-6) {
    int best = 0;
    double err = 1e300;
    cx b = 1.0;
    for (int k = 0; k < p; ++k) {
      double e = std::abs(b - ratio);
      if (e < err) {
        err = e;
        best = k;
      }
      b *= base;
    }
    if (err > tol * std::max(1.0, std::abs(ratio)))
      throw NonGenericError("grid ratio is not a power of q (error " + std::to_string(err) + ")");
    return best;
  }
};

}  // namespace sovlat
