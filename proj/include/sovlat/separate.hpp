/**
 * @file separate.hpp
 * @brief Separate states, determinant scalar products, orthogonality witness and eigenbasis identity.
 */
#pragma once

#include "sovlat/spectrum.hpp"

namespace sovlat {

enum class Side { Left, Right };

struct SeparateState {
  Side side = Side::Right;
  int k = 0;
  std::vector<Vec> tables;  ///< (N-1) tables of length p on the grid orbits
};

/// Assembled vector; left states are returned as the transpose of their row.
inline Vec make_separate_state(const SovBasis& b, const SeparateState& s) {
  if (s.side == Side::Right) return separate_right(b, s.k, s.tables);
  return separate_left(b, s.k, s.tables).transpose();
}

/// Random separate state with tables on the annulus 0.5 <= |z| <= 2.
inline SeparateState random_separate_state(const SovBasis& b, Side side, int k, Rng& rng) {
  SeparateState s{side, k, {}};
  for (int a = 0; a < b.n_sites() - 1; ++a) {
    Vec t(b.p());
    for (int h = 0; h < b.p(); ++h) t(h) = rng.annulus();
    s.tables.push_back(t);
  }
  return s;
}

/// Pairing column with general exponent: sum_h alpha(h) beta(h) / omega(eta_h) eta_h^{e}, eta_h = q^h eta_a^{(0)}.
/// e = 2(x-1) for the column with (possibly half-integer) index x.
inline cx pairing_column(const SovBasis& b, int a, const Vec& alpha, const Vec& beta, int e) {
  cx s = 0.0;
  for (int h = 0; h < b.p(); ++h) {
    const cx eh = b.eta(a, h);
    s += alpha(h) * beta(h) / b.omega(eh) * std::pow(eh, e);
  }
  return s;
}

/// (N-1) x (N-1) matrix M_{a,b} = (eta_a^{(0)})^{2(b-1)} sum_h alpha beta q^{2(b-1)h} / omega.
inline Mat pairing_matrix(const SovBasis& b, const std::vector<Vec>& alpha, const std::vector<Vec>& beta) {
  const int n = b.n_sites() - 1;
  Mat M(n, n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) M(a, c) = pairing_column(b, a, alpha[a], beta[a], 2 * c);
  return M;
}

/// <alpha_k|beta_h> = delta_{k,h} det M.
inline cx pairing_determinant(const SovBasis& b, const SeparateState& left, const SeparateState& right) {
  if (mod(left.k - right.k, b.p()) != 0) return 0.0;
  return pairing_matrix(b, left.tables, right.tables).determinant();
}

/// V_b = c'_b - c_b from the middle coefficients of two eigenvalues.
inline Vec orthogonality_witness(const EigenvaluePoly& t, const EigenvaluePoly& tp) {
  const auto c = t.middle(), cp = tp.middle();
  Vec V(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) V(i) = cp[i] - c[i];
  return V;
}

/// ||M V|| / || |M| |V| || with |M|_{a,b} the sum of absolute pairing terms (scale that survives M ~ 0).
inline double witness_residual(const SovBasis& b, const SpectralRecord& t, const SpectralRecord& tp) {
  const int n = b.n_sites() - 1;
  Mat M(n, n), Mabs = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      M(a, c) = pairing_column(b, a, t.tables.Qbar[a], tp.tables.Q[a], 2 * c);
      for (int h = 0; h < b.p(); ++h) {
        const cx eh = b.eta(a, h);
        Mabs(a, c) += std::abs(t.tables.Qbar[a](h) * tp.tables.Q[a](h) / b.omega(eh) * std::pow(eh, 2 * c));
      }
    }
  const Vec V = orthogonality_witness(t.t, tp.t);
  const Vec absV = V.cwiseAbs();
  return (M * V).norm() / std::max((Mabs * absV).norm(), 1e-300);
}

/// Determinant norm <t|t>.
inline cx eigen_norm(const SovBasis& b, const SpectralRecord& r) {
  return pairing_matrix(b, r.tables.Qbar, r.tables.Q).determinant();
}

/// sum_t |t><t| / <t|t> with determinant norms.
inline Mat eigen_identity_decomposition(const SovBasis& b, const std::vector<SpectralRecord>& recs) {
  Mat S = Mat::Zero(b.dim(), b.dim());
  for (const SpectralRecord& r : recs) S += r.right * r.left / eigen_norm(b, r);
  return S;
}

/// max over records of |<t| - c (|t>)^dagger| / ||<t||, c the best scalar (normal-case proportionality).
inline double adjoint_proportionality(const std::vector<SpectralRecord>& recs) {
  double err = 0.0;
  for (const SpectralRecord& r : recs) {
    RowVec d = r.right.adjoint();
    const cx c = d.dot(r.left) / d.squaredNorm();
    err = std::max(err, (r.left - c * d).norm() / r.left.norm());
  }
  return err;
}

}  // namespace sovlat
