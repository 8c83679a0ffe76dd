/**
 * @file weyl.hpp
 * @brief Cyclic Weyl generators on C^p and their embedding in the chain.
 *
 * u|k> = |k-1 mod p>, v|k> = q^k|k>, so that u v = q v u. Site 1 is the most
 * significant tensor factor.
 */
#pragma once

#include "sovlat/phase.hpp"

namespace sovlat {

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat local_u(const Phase& ph) {
  Mat u = Mat::Zero(ph.p, ph.p);
  for (int k = 0; k < ph.p; ++k) u(mod(k - 1, ph.p), k) = 1.0;
  return u;
}

inline Mat local_v(const Phase& ph) {
  Mat v = Mat::Zero(ph.p, ph.p);
  for (int k = 0; k < ph.p; ++k) v(k, k) = ph.qpow(k);
  return v;
}

/// Embeds a p x p operator at site (1-based) of an N-site chain.
inline Mat site_op(const Mat& op, int site, int n_sites, int p) {
  if (site < 1 || site > n_sites) throw std::out_of_range("site index " + std::to_string(site) + " outside 1.." + std::to_string(n_sites));
  const int left = ipow(p, site - 1);
  const int right = ipow(p, n_sites - site);
  return kron(kron(Mat::Identity(left, left), op), Mat::Identity(right, right));
}

/// (u_site, v_site) on the full p^N space.
inline std::pair<Mat, Mat> weyl_generators(const Phase& ph, int site, int n_sites) {
  return {site_op(local_u(ph), site, n_sites, ph.p), site_op(local_v(ph), site, n_sites, ph.p)};
}

inline Mat mat_power(const Mat& m, int e) {
  Mat r = Mat::Identity(m.rows(), m.cols());
  Mat b = m;
  while (e > 0) {
    if (e & 1) r = r * b;
    b = b * b;
    e >>= 1;
  }
  return r;
}

}  // namespace sovlat
