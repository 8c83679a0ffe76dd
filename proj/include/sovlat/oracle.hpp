/**
 * @file oracle.hpp
 * @brief Brute-force residual metrics and dense kernels used as ground truth.
 */
#pragma once

#include "sovlat/types.hpp"

#include <Eigen/SVD>

namespace sovlat {

struct ResidualReport {
  double absolute = 0.0;
  double relative = 0.0;
  double condition = 1.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline ResidualReport make_residual(double absolute, double scale, double tol, double cond = 1.0) {
  ResidualReport r;
  r.absolute = absolute;
  r.relative = absolute / std::max(scale, 1e-300);
  r.condition = cond;
  r.tolerance = tol;
  r.pass = std::isfinite(r.relative) && r.relative < tol;
  return r;
}

/// <l|O|r> by direct contraction (l is a row vector, no conjugation).
inline cx direct_matrix_element(const RowVec& l, const Mat& op, const Vec& r) {
  if (l.size() != op.rows() || r.size() != op.cols()) throw std::invalid_argument("dimension mismatch in matrix element");
  return (l * op * r)(0, 0);
}

/// ||AB - BA||_F / (||A||_F ||B||_F).
inline ResidualReport commutator_residual(const Mat& a, const Mat& b, double tol = 1e-10) {
  if (a.rows() != b.rows()) throw std::invalid_argument("dimension mismatch in commutator");
  Mat c = a * b - b * a;
  return make_residual(c.norm(), a.norm() * b.norm(), tol);
}

struct Kernel {
  Vec vector;
  double ratio = 1.0;   ///< sigma_min / sigma_max
  double ratio2 = 1.0;  ///< second smallest / sigma_max
};

/// Right singular vector of the smallest singular value.
inline Kernel kernel_vector(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::Index n = s.size();
  Kernel k;
  k.vector = svd.matrixV().col(m.cols() - 1);
  const double smax = std::max(s(0), 1e-300);
  k.ratio = (m.cols() > n ? 0.0 : s(n - 1)) / smax;
  k.ratio2 = n >= 2 ? s(n - 2) / smax : 1.0;
  return k;
}

/// min_c ||A - c B||_F / ||A||_F (equality up to a scalar).
inline double proportionality_residual(const Mat& a, const Mat& b) {
  const cx c = (b.adjoint() * a).trace() / (b.adjoint() * b).trace();
  return (a - c * b).norm() / std::max(a.norm(), 1e-300);
}

/// Spectral condition number.
inline double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  return s(0) / std::max(s(s.size() - 1), 1e-300);
}

/// Scales v so that its largest-magnitude entry equals one.
inline Vec normalize_max(const Vec& v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  return v / v(i);
}

/// |<a|b>| / (||a|| ||b||) with the Hermitian inner product.
inline double overlap(const Vec& a, const Vec& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace sovlat
