/**
 * @file chiral_potts.hpp
 * @brief Chiral Potts curve points, Boltzmann weight ratios, transfer matrices, S-operator and propagator.
 */
#pragma once

#include "sovlat/algebra.hpp"
#include "sovlat/oracle.hpp"

#include <Eigen/Eigenvalues>

namespace sovlat {

/// Point (a, b, c, d) on the curve C_k with x = a/d, y = b/c, s = d/c, t = x y.
struct CurvePoint {
  cx a, b, c, d, x, y, s, t, k, kp;

  /// Solves k x^p = 1 - k'/s^p and k y^p = 1 - k' s^p with p-th root branches bx, by.
  static CurvePoint make(int p, cx k, cx s, int bx = 0, int by = 0, cx scale = 1.0) {
    if (k == cx(0.0)) throw std::invalid_argument("curve modulus must be nonzero");
    const cx kp = std::sqrt(1.0 - k * k);
    const cx xp = (1.0 - kp / std::pow(s, p)) / k, yp = (1.0 - kp * std::pow(s, p)) / k;
    if (std::abs(xp) < 1e-14 || std::abs(yp) < 1e-14) throw NonGenericError("curve radicand vanishes");
    CurvePoint P;
    P.k = k;
    P.kp = kp;
    P.s = s;
    P.x = std::pow(xp, 1.0 / p) * std::polar(1.0, 2.0 * kPi * bx / p);
    P.y = std::pow(yp, 1.0 / p) * std::polar(1.0, 2.0 * kPi * by / p);
    P.c = scale;
    P.d = s * P.c;
    P.a = P.x * P.d;
    P.b = P.y * P.c;
    P.t = P.x * P.y;
    return P;
  }

  /// Self-adjoint point: k real, |s| = 1, y = q conj(x), c = conj(d).
  static CurvePoint self_adjoint(const Phase& ph, double k, double phi, double dmag, int branch) {
    const int p = ph.p;
    CurvePoint P;
    P.k = k;
    P.kp = std::sqrt(1.0 - k * k);
    P.s = std::polar(1.0, phi);
    const cx xp = (1.0 - P.kp / std::pow(P.s, p)) / P.k;
    P.x = std::pow(xp, 1.0 / p) * std::polar(1.0, 2.0 * kPi * branch / p);
    P.y = ph.q * std::conj(P.x);
    P.d = std::polar(dmag, std::arg(P.s) / 2.0);
    P.c = std::conj(P.d);
    P.a = P.x * P.d;
    P.b = P.y * P.c;
    P.t = P.x * P.y;
    return P;
  }

  CurvePoint scaled(cx sc) const {
    CurvePoint P = *this;
    P.a *= sc;
    P.b *= sc;
    P.c *= sc;
    P.d *= sc;
    return P;
  }

  /// (x, y) -> (q^i x, q^i y) with s and the scale unchanged.
  CurvePoint shifted(const Phase& ph, int i) const {
    CurvePoint P = *this;
    P.x *= ph.qpow(i);
    P.y *= ph.qpow(i);
    P.a = P.x * P.d;
    P.b = P.y * P.c;
    P.t = P.x * P.y;
    return P;
  }

  /// Largest residual among the three curve equations.
  double curve_residual(int p) const {
    const cx xp = std::pow(x, p), yp = std::pow(y, p), sp = std::pow(s, p);
    const double r1 = std::abs(xp + yp - k * (1.0 + xp * yp)) / std::max(1.0, std::abs(xp + yp));
    const double r2 = std::abs(k * xp - (1.0 - kp / sp)) / std::max(1.0, std::abs(k * xp));
    const double r3 = std::abs(k * yp - (1.0 - kp * sp)) / std::max(1.0, std::abs(k * yp));
    return std::max({r1, r2, r3});
  }
};

/// z-index of q^j, i.e. n with q^{-2n} = q^j.
inline int z_index_of_qpower(int j, int p) { return mod(-j * ((p + 1) / 2), p); }

/// W_{qp}(z(n)) / W_{qp}(z(0)), z(n) = q^{-2n}; reduce = false evaluates the raw product for n >= p.
inline cx w_ratio(const Phase& ph, const CurvePoint& qp, const CurvePoint& pp, int n, bool reduce = true) {
  if (reduce) n = mod(n, ph.p);
  cx v = std::pow(qp.s / pp.s, n);
  for (int k = 1; k <= n; ++k) v *= (pp.y - ph.qpow(-2 * k) * qp.x) / (qp.y - ph.qpow(-2 * k) * pp.x);
  return v;
}

inline cx wbar_ratio(const Phase& ph, const CurvePoint& qp, const CurvePoint& pp, int n, bool reduce = true) {
  if (reduce) n = mod(n, ph.p);
  cx v = std::pow(pp.s * qp.s, n);
  for (int k = 1; k <= n; ++k)
    v *= (ph.qpow(-2) * qp.x - ph.qpow(-2 * k) * pp.x) / (pp.y - ph.qpow(-2 * k) * qp.y);
  return v;
}

struct WeightTable {
  std::vector<cx> W, Wbar;  ///< n = 0..p-1
};

inline WeightTable boltzmann_ratios(const Phase& ph, const CurvePoint& qp, const CurvePoint& pp) {
  WeightTable t;
  for (int n = 0; n < ph.p; ++n) {
    t.W.push_back(w_ratio(ph, qp, pp, n));
    t.Wbar.push_back(wbar_ratio(ph, qp, pp, n));
  }
  return t;
}

/// Max relative deviation of W(zq)/W(z/q) and Wbar(zq)/Wbar(z/q) from their closed forms over z in S_p.
inline double w_recursion_residual(const Phase& ph, const CurvePoint& Q, const CurvePoint& P) {
  const int p = ph.p, h = (p + 1) / 2;
  const cx q = ph.q;
  double e = 0.0;
  for (int n = 0; n < p; ++n) {
    const cx z = ph.qpow(-2 * n);
    const int up = mod(n - h, p), dn = mod(n + h, p);
    cx lhs = w_ratio(ph, Q, P, up) / w_ratio(ph, Q, P, dn);
    cx rhs = -z * P.s / Q.s * P.x / P.y / q * (1.0 - Q.y / P.x * q / z) / (1.0 - Q.x / P.y / q * z);
    e = std::max(e, std::abs(lhs / rhs - 1.0));
    lhs = wbar_ratio(ph, Q, P, up) / wbar_ratio(ph, Q, P, dn);
    rhs = -q / z / (P.s * Q.s) * P.y / P.x * (1.0 - Q.y / P.y / q * z) / (1.0 - Q.x / P.x / q / z);
    e = std::max(e, std::abs(lhs / rhs - 1.0));
  }
  return e;
}

/// |W(z(p)) - 1| and |Wbar(z(p)) - 1| from the unreduced products.
inline double w_cyclicity_residual(const Phase& ph, const CurvePoint& Q, const CurvePoint& P) {
  return std::max(std::abs(w_ratio(ph, Q, P, ph.p, false) - 1.0), std::abs(wbar_ratio(ph, Q, P, ph.p, false) - 1.0));
}

/// Change of basis from the z-basis (|z> = sum_k z^k |k> / sqrt p) to the computational basis.
inline Mat z_basis(const Phase& ph, int N) {
  const int p = ph.p;
  Mat Z1(p, p);
  for (int k = 0; k < p; ++k)
    for (int n = 0; n < p; ++n) Z1(k, n) = ph.qpow(-2 * n * k) / std::sqrt(double(p));
  Mat out = Mat::Identity(1, 1);
  for (int n = 0; n < N; ++n) out = kron(out, Z1);
  return out;
}

namespace detail {
/// Kernel K(z, z') = prod_n f_n(z_n - z'_n) g_n(z_{n+a} - z'_{n+b}) conjugated to the computational basis.
template <class F>
Mat chp_kernel(const Phase& ph, int N, F entry) {
  const int p = ph.p, dim = ipow(p, N);
  Mat K(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const Label z = label_from_index(i, p, N);
    for (int j = 0; j < dim; ++j) K(i, j) = entry(z, label_from_index(j, p, N));
  }
  Mat Zb = z_basis(ph, N);
  return Zb * K * Zb.adjoint();
}
}  // namespace detail

/// T^chP(P) with kernel prod_n W_{q_n P}(z_n - z'_n) Wbar_{r_n P}(z_n - z'_{n+1}).
inline Mat chp_T(const Phase& ph, const CurvePoint& P, const std::vector<CurvePoint>& qs,
                 const std::vector<CurvePoint>& rs) {
  const int N = int(qs.size());
  std::vector<WeightTable> wq, wr;
  for (int n = 0; n < N; ++n) {
    wq.push_back(boltzmann_ratios(ph, qs[n], P));
    wr.push_back(boltzmann_ratios(ph, rs[n], P));
  }
  return detail::chp_kernel(ph, N, [&](const Label& z, const Label& zp) {
    cx v = 1.0;
    for (int n = 0; n < N; ++n)
      v *= wq[n].W[mod(z[n] - zp[n], ph.p)] * wr[n].Wbar[mod(z[n] - zp[(n + 1) % N], ph.p)];
    return v;
  });
}

/// Second transfer matrix with kernel prod_n W_{r_n P}(z_{n+1} - z'_n) Wbar_{q_n P}(z_n - z'_n).
inline Mat chp_T_hat(const Phase& ph, const CurvePoint& P, const std::vector<CurvePoint>& qs,
                     const std::vector<CurvePoint>& rs) {
  const int N = int(qs.size());
  std::vector<WeightTable> wq, wr;
  for (int n = 0; n < N; ++n) {
    wq.push_back(boltzmann_ratios(ph, qs[n], P));
    wr.push_back(boltzmann_ratios(ph, rs[n], P));
  }
  return detail::chp_kernel(ph, N, [&](const Label& z, const Label& zp) {
    cx v = 1.0;
    for (int n = 0; n < N; ++n)
      v *= wr[n].W[mod(z[(n + 1) % N] - zp[n], ph.p)] * wq[n].Wbar[mod(z[n] - zp[n], ph.p)];
    return v;
  });
}

/// Lax constants of site n built from its pair of curve points and the spectral scale c0.
inline SiteParams lax_from_curve(const Phase& ph, const CurvePoint& Q, const CurvePoint& R, cx c0) {
  const cx qh = ph.q_half;
  return SiteParams::make(-Q.b * R.b / c0, -c0 * Q.d * R.d, -Q.c * R.b / qh, Q.a * R.d / (qh * qh * qh),
                          Q.b * R.c * qh, -Q.d * R.a / qh);
}

/// Two-site S-operator with kernel Wbar_{q2 q1}(z1-y2) W_{r2 q1}(y1-y2) Wbar_{r2 r1}(z2-y1) W_{q2 r1}(z2-z1).
inline Mat s_operator(const Phase& ph, const CurvePoint& q1, const CurvePoint& r1, const CurvePoint& q2,
                      const CurvePoint& r2) {
  const int p = ph.p;
  WeightTable a = boltzmann_ratios(ph, q2, q1), b = boltzmann_ratios(ph, r2, q1), c = boltzmann_ratios(ph, r2, r1),
              d = boltzmann_ratios(ph, q2, r1);
  return detail::chp_kernel(ph, 2, [&](const Label& z, const Label& y) {
    return a.Wbar[mod(z[0] - y[1], p)] * b.W[mod(y[0] - y[1], p)] * c.Wbar[mod(z[1] - y[0], p)] *
           d.W[mod(z[1] - z[0], p)];
  });
}

/// Relative residual of L_02 L_01 S = S L_01 L_02 on two sites at spectral parameter lambda.
inline double s_intertwining_residual(const Phase& ph, const CurvePoint& q1, const CurvePoint& r1,
                                      const CurvePoint& q2, const CurvePoint& r2, cx c0, cx lambda) {
  ModelParams m{ph, 2, {lax_from_curve(ph, q1, r1, c0), lax_from_curve(ph, q2, r2, c0)}, 0};
  Chain ch(m);
  Mat S = s_operator(ph, q1, r1, q2, r2);
  Op2 L1 = ch.lax(1, lambda), L2 = ch.lax(2, lambda);
  const Mat* l1[2][2] = {{&L1.A, &L1.B}, {&L1.C, &L1.D}};
  const Mat* l2[2][2] = {{&L2.A, &L2.B}, {&L2.C, &L2.D}};
  double err = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat lhs = (*l2[i][0] * *l1[0][j] + *l2[i][1] * *l1[1][j]) * S;
      Mat rhs = S * (*l1[i][0] * *l2[0][j] + *l1[i][1] * *l2[1][j]);
      err = std::max(err, (lhs - rhs).norm() / lhs.norm());
    }
  return err;
}

/// Site curve points, spectral scale and the induced Bazhanov-Stroganov model.
struct ChpSetup {
  std::vector<CurvePoint> qs, rs;
  cx k, c0;
  ModelParams model;
  Rng rng{0};

  /// Fresh point on the same curve.
  CurvePoint random_point() {
    const cx s = rng.annulus() * 0.8 + 0.3;
    const int bx = rng.integer(model.phase.p), by = rng.integer(model.phase.p);
    return CurvePoint::make(model.phase.p, k, s, bx, by, rng.annulus());
  }
};

/// Curve sampling: |k| in [0.2, 0.8]; homogeneous uses q_n = r_n = Q for all n.
inline ChpSetup sample_chp(const Phase& ph, int N, std::uint64_t seed, bool homogeneous) {
  ChpSetup st;
  st.rng = Rng(seed);
  st.k = std::polar(st.rng.uniform(0.2, 0.8), st.rng.uniform(0.0, 2.0 * kPi));
  st.c0 = std::polar(st.rng.uniform(0.7, 1.3), st.rng.uniform(0.0, 2.0 * kPi));
  st.model = ModelParams{ph, N, {}, seed};
  if (homogeneous) {
    CurvePoint Q = st.random_point();
    st.qs.assign(N, Q);
    st.rs.assign(N, Q);
  } else {
    for (int n = 0; n < N; ++n) st.qs.push_back(st.random_point());
    for (int n = 0; n < N; ++n) st.rs.push_back(st.random_point());
  }
  for (int n = 0; n < N; ++n) st.model.sites.push_back(lax_from_curve(ph, st.qs[n], st.rs[n], st.c0));
  return st;
}

/// Homogeneous self-adjoint sample: k real, |s| = 1, real c0.
inline ChpSetup sample_self_adjoint_chp(const Phase& ph, int N, std::uint64_t seed) {
  ChpSetup st;
  st.rng = Rng(seed);
  const double k = st.rng.uniform(0.2, 0.8);
  st.k = k;
  st.c0 = st.rng.uniform(0.7, 1.3);
  const CurvePoint Q = CurvePoint::self_adjoint(ph, k, st.rng.uniform(0.2, 2.0 * kPi / ph.p - 0.2),
                                                st.rng.uniform(0.7, 1.3), st.rng.integer(ph.p));
  st.qs.assign(N, Q);
  st.rs.assign(N, Q);
  st.model = ModelParams{ph, N, {}, seed};
  for (int n = 0; n < N; ++n) st.model.sites.push_back(lax_from_curve(ph, Q, Q, st.c0));
  return st;
}

/// U_m^{-1} = prod_{j<m} T(r_j) T_hat(q_j).
inline Mat propagator_inverse(const Phase& ph, const std::vector<CurvePoint>& qs, const std::vector<CurvePoint>& rs,
                              int m) {
  const int N = int(qs.size());
  if (m < 1 || m > N) throw std::out_of_range("propagator site out of range");
  Mat Ui = Mat::Identity(ipow(ph.p, N), ipow(ph.p, N));
  for (int j = 1; j < m; ++j) Ui = Ui * chp_T(ph, rs[j - 1], qs, rs) * chp_T_hat(ph, qs[j - 1], qs, rs);
  return Ui;
}

/// max over monodromy entries of ||U M U^{-1} - M_{m..N,1..m-1}|| / ||M_shifted||.
inline double propagator_residual(const Chain& ch, const Mat& Uinv, int m, cx lambda) {
  Mat U = Uinv.inverse();
  Op2 M = ch.monodromy(lambda), S = ch.shifted_monodromy(lambda, m);
  const Mat* a[4] = {&M.A, &M.B, &M.C, &M.D};
  const Mat* b[4] = {&S.A, &S.B, &S.C, &S.D};
  double err = 0.0;
  for (int i = 0; i < 4; ++i) err = std::max(err, (U * *a[i] * Uinv - *b[i]).norm() / b[i]->norm());
  return err;
}

/// Baxter Q-operator fit in the joint eigenbasis of the homogeneous model.
struct QOperatorFit {
  double held_out_residual = 0.0;  ///< worst residual over eigenvectors not used in the fit
  double average_residual = 0.0;   ///< |prod a_BS - Omega_eps| / |Omega_eps|, best eps
  std::vector<cx> a_bs, d_bs;      ///< fitted values at q^n lambda_P
};

inline QOperatorFit verify_q_operator_property(const Chain& ch, const Amplitudes& amps, const ChpSetup& st,
                                               const CurvePoint& P) {
  const Phase& ph = ch.phase();
  const int p = ph.p;
  Eigen::ComplexEigenSolver<Mat> es(ch.tau2(cx(0.61, 0.37)));
  const Mat V = es.eigenvectors(), Vi = V.inverse();
  std::vector<Vec> qd(p);
  for (int i = 0; i < p; ++i) qd[i] = (Vi * chp_T(ph, P.shifted(ph, i), st.qs, st.rs) * V).diagonal();
  const cx lam = st.c0 / std::sqrt(P.t);
  QOperatorFit fit;
  cx prod = 1.0;
  for (int n = 0; n < p; ++n) {
    const cx l = lam * ph.qpow(n);
    Vec t = (Vi * ch.tau2(l) * V).diagonal();
    const Vec& Q0 = qd[mod(-n, p)];
    const Vec& Qm = qd[mod(-n + 1, p)];
    const Vec& Qp = qd[mod(-n - 1, p)];
    Eigen::Matrix2cd A;
    A << Qm(0), Qp(0), Qm(1), Qp(1);
    Eigen::Vector2cd rhs(t(0) * Q0(0), t(1) * Q0(1));
    Eigen::Vector2cd c = A.colPivHouseholderQr().solve(rhs);
    Vec lhs = t.cwiseProduct(Q0), pred = c(0) * Qm + c(1) * Qp;
    const Eigen::Index rest = t.size() - 2;
    fit.held_out_residual =
        std::max(fit.held_out_residual, (pred.tail(rest) - lhs.tail(rest)).norm() / std::max(lhs.norm(), 1e-300));
    fit.a_bs.push_back(c(0));
    fit.d_bs.push_back(c(1));
    prod *= c(0);
  }
  const cx Lam = std::pow(lam, p);
  const cx op = amps.omega(Lam, 1), om = amps.omega(Lam, -1);
  fit.average_residual = std::min(std::abs(prod - op) / std::abs(op), std::abs(prod - om) / std::abs(om));
  return fit;
}

}  // namespace sovlat
