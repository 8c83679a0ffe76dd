/**
 * @file types.hpp
 * @brief Scalar, matrix and label aliases shared by every module.
 */
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sovlat {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RowVec = Eigen::RowVectorXcd;

/// SOV label (k_1, ..., k_N) with every entry in Z_p.
using Label = std::vector<int>;

inline constexpr cx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Raised when sampled parameters are too close to a degenerate configuration.
struct NonGenericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised for invalid root-of-unity data or malformed configuration values.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline int mod(int a, int p) { return ((a % p) + p) % p; }

/// Mixed-radix index of a label, first entry most significant.
inline int label_index(const Label& k, int p) {
  int idx = 0;
  for (int x : k) idx = idx * p + mod(x, p);
  return idx;
}

inline Label label_from_index(int idx, int p, int n) {
  Label k(n);
  for (int i = n - 1; i >= 0; --i) {
    k[i] = idx % p;
    idx /= p;
  }
  return k;
}

inline Label shifted(Label k, int a, int s, int p) {
  k[a] = mod(k[a] + s, p);
  return k;
}

inline int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// Relative Frobenius residual with a floor on the denominator.
inline double rel(const Mat& diff, double scale) {
  return diff.norm() / std::max(scale, 1e-300);
}

}  // namespace sovlat
