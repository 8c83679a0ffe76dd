/**
 * @file spectrum.hpp
 * @brief Transfer-matrix spectrum, SOV functional equation, Baxter Q tables and SOV eigenstates.
 */
#pragma once

#include "sovlat/sov.hpp"

namespace sovlat {

/// t(lambda) = sum_{j=0}^N coef[j] lambda^{-N+2j}.
struct EigenvaluePoly {
  int k = 0;
  int n_sites = 2;
  std::vector<cx> coef;

  cx operator()(cx lam) const {
    cx v = 0.0;
    for (int j = 0; j <= n_sites; ++j) v += coef[j] * std::pow(lam, -n_sites + 2 * j);
    return v;
  }
  /// Middle coefficients c_b, b = 1..N-1.
  std::vector<cx> middle() const { return std::vector<cx>(coef.begin() + 1, coef.end() - 1); }
};

/// Least-squares fit of the Laurent coefficients from samples t(lams[i]) = vals[i].
inline EigenvaluePoly fit_eigenvalue_poly(const std::vector<cx>& lams, const std::vector<cx>& vals, int N, int k) {
  Mat X(lams.size(), N + 1);
  Vec y(lams.size());
  for (std::size_t i = 0; i < lams.size(); ++i) {
    for (int j = 0; j <= N; ++j) X(i, j) = std::pow(lams[i], -N + 2 * j);
    y(i) = vals[i];
  }
  Vec c = lstsq(X, y);
  return {k, N, std::vector<cx>(c.data(), c.data() + c.size())};
}

/// Sample points for eigenvalue fits, 2 (N+2) points on two circles.
inline std::vector<cx> t_sample_points(int N, double offset = 0.1) {
  std::vector<cx> out;
  for (double r : {0.9, 1.3})
    for (int j = 0; j < N + 2; ++j) out.push_back(std::polar(r, 2.0 * kPi * j / (N + 3) + offset));
  return out;
}

struct OracleState {
  int k = 0;
  EigenvaluePoly t;
  Vec right;
  RowVec left;
};

/// Dense diagonalization of tau2(lambda0) in each Theta sector; left eigenvectors are rows of the inverse.
inline std::vector<OracleState> oracle_eigensystem(const Chain& ch, cx lambda0 = cx(0.77, 0.31),
                                                   int dim_cap = 2000) {
  const int p = ch.p(), N = ch.n_sites(), dim = ch.dim();
  if (dim > dim_cap) throw ConfigError("p^N exceeds the dimension cap");
  const Mat T0 = ch.tau2(lambda0);
  std::vector<OracleState> out;
  for (int k = 0; k < p; ++k) {
    std::vector<int> idx;
    for (int i = 0; i < dim; ++i) {
      const Label l = label_from_index(i, p, N);
      int s = 0;
      for (int x : l) s += x;
      if (mod(s, p) == k) idx.push_back(i);
    }
    const int n = int(idx.size());
    Mat blk(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) blk(i, j) = T0(idx[i], idx[j]);
    Eigen::ComplexEigenSolver<Mat> es(blk);
    Mat V = es.eigenvectors();
    Mat W = V.inverse();
    for (int i = 0; i < n; ++i) {
      OracleState o;
      o.k = k;
      o.right = Vec::Zero(dim);
      o.left = RowVec::Zero(dim);
      for (int j = 0; j < n; ++j) {
        o.right(idx[j]) = V(j, i);
        o.left(idx[j]) = W(i, j);
      }
      out.push_back(std::move(o));
    }
  }
  const std::vector<cx> lams = t_sample_points(N);
  std::vector<Mat> taus;
  for (cx l : lams) taus.push_back(ch.tau2(l));
  for (OracleState& o : out) {
    std::vector<cx> vals;
    for (const Mat& T : taus) vals.push_back(o.right.dot(T * o.right) / o.right.squaredNorm());
    o.t = fit_eigenvalue_poly(lams, vals, N, o.k);
  }
  return out;
}

/// Worst relative eigen-residual ||tau2(l) r - t(l) r|| / ||tau2(l) r||.
inline double eigen_residual(const Chain& ch, const Vec& r, const EigenvaluePoly& t, cx lam) {
  Vec lhs = ch.tau2(lam) * r;
  return (lhs - t(lam) * r).norm() / std::max(lhs.norm(), 1e-300);
}

using ScalarFn = std::function<cx(cx)>;

/// Cyclic tridiagonal D(lambda0): D[j,j] = t(q^j l0), D[j,j+1] = -dbar, D[j,j-1] = -abar.
inline Mat d_matrix(const Phase& ph, const EigenvaluePoly& t, cx lam0, const ScalarFn& abar, const ScalarFn& dbar) {
  const int p = ph.p;
  Mat D = Mat::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    const cx l = ph.qpow(j) * lam0;
    D(j, j) += t(l);
    D(j, mod(j + 1, p)) -= dbar(l);
    D(j, mod(j - 1, p)) -= abar(l);
  }
  return D;
}

/// Companion matrix of the left Baxter equation: D[j,j+1] = -abar(q l), D[j,j-1] = -dbar(l/q).
inline Mat dbar_matrix(const Phase& ph, const EigenvaluePoly& t, cx lam0, const ScalarFn& abar, const ScalarFn& dbar) {
  const int p = ph.p;
  Mat D = Mat::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    const cx l = ph.qpow(j) * lam0;
    D(j, j) += t(l);
    D(j, mod(j + 1, p)) -= abar(ph.q * l);
    D(j, mod(j - 1, p)) -= dbar(l / ph.q);
  }
  return D;
}

/// D matrix on the a-th grid orbit in the fixed gauge.
inline Mat d_matrix(const SovBasis& b, const EigenvaluePoly& t, int a) {
  return d_matrix(b.phase(), t, b.grid().eta0[a], [&](cx l) { return b.abar(a, l); },
                  [&](cx l) { return b.dbar(a, l); });
}
inline Mat dbar_matrix(const SovBasis& b, const EigenvaluePoly& t, int a) {
  return dbar_matrix(b.phase(), t, b.grid().eta0[a], [&](cx l) { return b.abar(a, l); },
                     [&](cx l) { return b.dbar(a, l); });
}

/// sigma_min/sigma_max of D(Lambda) at an arbitrary Lambda, using the eps = +1 orbit constant.
inline double functional_equation_ratio(const SovBasis& b, const EigenvaluePoly& t, cx Lambda) {
  const int p = b.p();
  const cx l0 = std::pow(Lambda, 1.0 / p);
  const Amplitudes& am = b.amplitudes();
  const cx al = am.orbit_constant_eps(l0, 1);
  Mat D = d_matrix(b.phase(), t, l0, [&](cx l) { return al * am.a(l); }, [&](cx l) { return am.d(l) / al; });
  return kernel_vector(D).ratio;
}

/// Q and Qbar values on the grid: Q[a](h) = Q_t(eta_a^{(h)}).
struct QTable {
  std::vector<Vec> Q, Qbar;
  double worst_ratio = 0.0;     ///< largest sigma_min/sigma_max over the D matrices
  double smallest_ratio2 = 1.0; ///< smallest second-singular-value ratio (kernel dimension probe)
};

inline QTable solve_q_tables(const SovBasis& b, const EigenvaluePoly& t) {
  QTable qt;
  for (int a = 0; a < b.n_sites() - 1; ++a) {
    Kernel k1 = kernel_vector(d_matrix(b, t, a));
    Kernel k2 = kernel_vector(dbar_matrix(b, t, a));
    qt.Q.push_back(normalize_max(k1.vector));
    qt.Qbar.push_back(normalize_max(k2.vector));
    qt.worst_ratio = std::max({qt.worst_ratio, k1.ratio, k2.ratio});
    qt.smallest_ratio2 = std::min({qt.smallest_ratio2, k1.ratio2, k2.ratio2});
  }
  return qt;
}

/// Residual of t Q(h) - abar Q(h-1) - dbar Q(h+1) (op = 0) or of the left equation (op = 1).
inline double baxter_residual(const SovBasis& b, const EigenvaluePoly& t, const QTable& qt) {
  double err = 0.0;
  for (int a = 0; a < b.n_sites() - 1; ++a) {
    Vec r1 = d_matrix(b, t, a) * qt.Q[a];
    Vec r2 = dbar_matrix(b, t, a) * qt.Qbar[a];
    Mat D1 = d_matrix(b, t, a), D2 = dbar_matrix(b, t, a);
    err = std::max({err, r1.norm() / (D1.norm() * qt.Q[a].norm()), r2.norm() / (D2.norm() * qt.Qbar[a].norm())});
  }
  return err;
}

/// Separate-state coefficient at label h: prod tables[a](h_a) V(h) / prod omega.
inline cx separate_weight(const SovBasis& b, const std::vector<Vec>& tables, const Label& h) {
  cx w = b.vandermonde(h) / b.omega_product(h);
  for (int a = 0; a < b.n_sites() - 1; ++a) w *= tables[a](h[a]);
  return w;
}

/// Right separate state sum_h q^{-k h_N} p^{-1/2} w(h) |eta_h>.
inline Vec separate_right(const SovBasis& b, int k, const std::vector<Vec>& tables) {
  const int p = b.p(), N = b.n_sites();
  Vec out = Vec::Zero(b.dim());
  for (int i = 0; i < b.dim(); ++i) {
    const Label h = label_from_index(i, p, N);
    out += b.phase().qpow(-k * h[N - 1]) / std::sqrt(double(p)) * separate_weight(b, tables, h) * b.right().col(i);
  }
  return out;
}

/// Left separate state sum_h q^{k h_N} p^{-1/2} w(h) <eta_h|.
inline RowVec separate_left(const SovBasis& b, int k, const std::vector<Vec>& tables) {
  const int p = b.p(), N = b.n_sites();
  RowVec out = RowVec::Zero(b.dim());
  for (int i = 0; i < b.dim(); ++i) {
    const Label h = label_from_index(i, p, N);
    out += b.phase().qpow(k * h[N - 1]) / std::sqrt(double(p)) * separate_weight(b, tables, h) * b.left().row(i);
  }
  return out;
}

struct SpectralRecord {
  EigenvaluePoly t;
  QTable tables;
  Vec right;
  RowVec left;
  Vec oracle_right;
  RowVec oracle_left;
  int k() const { return t.k; }
};

/// Builds Q tables and SOV eigenstates for every oracle eigenvalue.
inline std::vector<SpectralRecord> assemble_spectrum(const SovBasis& b, const std::vector<OracleState>& orc) {
  std::vector<SpectralRecord> out;
  for (const OracleState& o : orc) {
    SpectralRecord r;
    r.t = o.t;
    r.tables = solve_q_tables(b, o.t);
    r.right = separate_right(b, o.k, r.tables.Q);
    r.left = separate_left(b, o.k, r.tables.Qbar);
    r.oracle_right = o.right;
    r.oracle_left = o.left;
    out.push_back(std::move(r));
  }
  return out;
}

/// |<a|b>| / (||a|| ||b||) for row covectors.
inline double overlap(const RowVec& a, const RowVec& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace sovlat
