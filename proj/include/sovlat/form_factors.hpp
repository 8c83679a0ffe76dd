/**
 * @file form_factors.hpp
 * @brief Determinant form factors of u_n^{-1}, alpha_{0,n}^{-1} and elementary operators, VGR Hamiltonians.
 */
#pragma once

#include "sovlat/chiral_potts.hpp"
#include "sovlat/local_ops.hpp"
#include "sovlat/separate.hpp"

namespace sovlat {

struct FormFactorResult {
  int left_index = 0, right_index = 0;
  int k = 0, k_prime = 0;
  std::string op;
  cx det_value, oracle_value;
  double rel_err = 0.0;  ///< relative to |oracle| on nonzero entries, absolute (scaled) otherwise
  bool selected = false; ///< charge rule allows a nonzero value
};

/// phi = <t|U|t>/<t|t> and the eigen-residual ||U|t> - phi|t>|| / ||U|t>||.
struct ShiftEigenvalue {
  cx phi = 1.0;
  double residual = 0.0;
};
inline ShiftEigenvalue shift_eigenvalue(const SpectralRecord& r, const Mat& U) {
  ShiftEigenvalue s;
  const Vec Ur = U * r.right;
  s.phi = (r.left * Ur)(0, 0) / (r.left * r.right)(0, 0);
  s.residual = (Ur - s.phi * r.right).norm() / Ur.norm();
  return s;
}

/// (N-1) x (N-1) matrix whose determinant is <t|B^{-1}A(lambda)|t'>; left tables Qbar_t, right tables Q_t'.
inline Mat u_matrix(const SovBasis& b, const QTable& t, const QTable& tp, int kp, cx lam) {
  const int N = b.n_sites(), p = b.p();
  const auto as = b.amplitudes().asymptotics();
  const Phase& ph = b.phase();
  Mat U(N - 1, N - 1);
  for (int a = 0; a < N - 1; ++a) {
    for (int c = 1; c < N - 1; ++c) U(a, c - 1) = pairing_column(b, a, t.Qbar[a], tp.Q[a], 2 * c - 1);
    cx s = 0.0;
    for (int h = 0; h < p; ++h) {
      const cx eh = b.eta(a, h), eh1 = b.eta(a, h + 1);
      s += tp.Q[a](h) * (t.Qbar[a](mod(h + 1, p)) * b.abar(a, ph.q * eh) / (lam / eh1 - eh1 / lam) +
                         t.Qbar[a](h) * (as.ap * lam * std::pow(eh, N - 1) * ph.qpow(kp) -
                                         as.am / lam * std::pow(eh, -(N - 1)) * ph.qpow(-kp)));
    }
    U(a, N - 2) = s / b.grid().etaN0;
  }
  return U;
}

/// Input bundle for a form-factor sweep at site n.
struct FormFactorContext {
  const Chain* chain = nullptr;
  const Amplitudes* amps = nullptr;
  const SovBasis* basis = nullptr;
  const std::vector<SpectralRecord>* records = nullptr;
  Mat U_inv;  ///< U_n^{-1}
  int site = 1;
};

namespace detail {
inline double ff_error(cx det, cx ora, double scale) {
  if (std::abs(ora) > 1e-9 * scale) return std::abs(det - ora) / std::abs(ora);
  return std::abs(det - ora) / scale;
}
inline std::vector<cx> shift_phis(const FormFactorContext& c) {
  std::vector<cx> phis;
  const Mat U = c.U_inv.inverse();
  for (const SpectralRecord& r : *c.records) phis.push_back(shift_eigenvalue(r, U).phi);
  return phis;
}
}  // namespace detail

/// <t|u_n^{-1}|t'> = c_n phi_t/phi_t' delta_{k,k'+1} det U(mu_{n,+}), against the direct matrix element.
inline std::vector<FormFactorResult> ff_u_inverse(const FormFactorContext& c) {
  const auto& recs = *c.records;
  const int p = c.basis->p(), n = c.site;
  const Mat op = local_u_inverse(*c.chain, n);
  const cx cn = u_inverse_constant(*c.chain, *c.amps, n);
  const cx mu = c.amps->mu_plus()[n - 1];
  const auto phis = detail::shift_phis(c);
  std::vector<FormFactorResult> out;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < recs.size(); ++j) {
      const SpectralRecord &t = recs[i], &tp = recs[j];
      FormFactorResult r{int(i), int(j), t.k(), tp.k(), "u_inverse", 0.0, 0.0, 0.0, false};
      r.selected = mod(t.k() - tp.k() - 1, p) == 0;
      r.oracle_value = (t.left * op * tp.right)(0, 0);
      if (r.selected) r.det_value = cn * phis[i] / phis[j] * u_matrix(*c.basis, t.tables, tp.tables, tp.k(), mu).determinant();
      r.rel_err = detail::ff_error(r.det_value, r.oracle_value, t.left.norm() * tp.right.norm());
      out.push_back(std::move(r));
    }
  return out;
}

/// <t|alpha_{0,n}^{-1}|t'> = phi_t/phi_t' delta_{k,k'+1} det U(mu_{n,-}).
inline std::vector<FormFactorResult> ff_alpha0_inverse(const FormFactorContext& c) {
  const auto& recs = *c.records;
  const int p = c.basis->p(), n = c.site;
  const Mat op = direct_alpha0(*c.chain, *c.amps, n).inverse();
  const cx mu = c.amps->mu_minus()[n - 1];
  const auto phis = detail::shift_phis(c);
  std::vector<FormFactorResult> out;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < recs.size(); ++j) {
      const SpectralRecord &t = recs[i], &tp = recs[j];
      FormFactorResult r{int(i), int(j), t.k(), tp.k(), "alpha0_inverse", 0.0, 0.0, 0.0, false};
      r.selected = mod(t.k() - tp.k() - 1, p) == 0;
      r.oracle_value = (t.left * op * tp.right)(0, 0);
      if (r.selected) r.det_value = phis[i] / phis[j] * u_matrix(*c.basis, t.tables, tp.tables, tp.k(), mu).determinant();
      r.rel_err = detail::ff_error(r.det_value, r.oracle_value, t.left.norm() * tp.right.norm());
      out.push_back(std::move(r));
    }
  return out;
}

/// Worst relative deviation of det U(lambda) from <t|B^{-1}A(lambda)|t'> over selected pairs.
inline double u_matrix_lambda_check(const Chain& ch, const SovBasis& b, const std::vector<SpectralRecord>& recs,
                                    cx lam) {
  const Op2 M = ch.monodromy(lam);
  const Mat BA = M.B.partialPivLu().solve(M.A);
  double err = 0.0;
  for (const auto& t : recs)
    for (const auto& tp : recs) {
      if (mod(t.k() - tp.k() - 1, b.p()) != 0) continue;
      const cx ora = (t.left * BA * tp.right)(0, 0);
      const cx det = u_matrix(b, t.tables, tp.tables, tp.k(), lam).determinant();
      err = std::max(err, detail::ff_error(det, ora, t.left.norm() * tp.right.norm()));
    }
  return err;
}

inline cx vandermonde_product(const std::vector<cx>& xs) {
  cx v = 1.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) v *= xs[i] - xs[j];
  return v;
}

/// Determinant formula for <t|E_{h,h0,(a_i,k_i)}^{(alpha_i)}|t'>.
inline cx elementary_determinant(const SovBasis& b, const SpectralRecord& t, const SpectralRecord& tp, int h, int h0,
                                 const std::vector<ElementaryOps::Item>& items) {
  const int p = b.p(), N = b.n_sites();
  const Phase& ph = b.phase();
  const auto as = b.amplitudes().asymptotics();
  if (mod(t.k() - tp.k() - h, p) != 0) return 0.0;
  const int r = int(items.size());
  int g = 0;
  std::vector<int> asel;
  for (const auto& it : items) {
    g += it.alpha;
    asel.push_back(it.a);
  }
  std::vector<int> bsel;
  for (int c = 0; c < N - 1; ++c)
    if (std::find(asel.begin(), asel.end(), c) == asel.end()) bsel.push_back(c);
  const int n = N - 1 + r * p - g;
  Mat O(n, n);
  int col = 0;
  for (const auto& it : items) {
    const cx e = b.eta(it.a, it.k);
    for (int j = 0; j < p - it.alpha + 1; ++j, ++col)
      for (int row = 0; row < n; ++row) O(row, col) = std::pow(e * e * ph.qpow(2 * j), row);
  }
  for (int c : bsel) {
    for (int row = 0; row < n; ++row)
      O(row, col) = pairing_column(b, c, t.tables.Qbar[c], tp.tables.Q[c], 2 * row + h0 + g);
    ++col;
  }
  std::vector<cx> Z;
  for (cx e : b.grid().eta0) Z.push_back(std::pow(e, p));
  cx num = 1.0, den = 1.0;
  for (int i = 0; i < r; ++i) {
    const auto& it = items[i];
    const cx e = b.eta(it.a, it.k);
    num *= tp.tables.Q[it.a](mod(it.k - it.alpha, p)) * t.tables.Qbar[it.a](mod(it.k, p)) *
           std::pow(e, h0 + it.alpha * (N - 1 - r)) / std::pow(e, N - 2);
    for (int s = 0; s < it.alpha; ++s) num *= b.abar(it.a, e * ph.qpow(-s));
    for (int s = 0; s < it.alpha; ++s) {
      for (int j = 0; j < i; ++j) {
        const cx ej = b.eta(items[j].a, items[j].k);
        const cx x = ph.qpow(items[j].alpha - s) * e;
        den *= x / ej - ej / x;
      }
      for (int j = i + 1; j < r; ++j) {
        const cx ej = b.eta(items[j].a, items[j].k);
        den *= e / (ph.qpow(s) * ej) - ph.qpow(s) * ej / e;
      }
    }
    num *= std::pow(ph.q, -double(N - 1 - r) * it.alpha * (it.alpha - 1) / 2.0);
    for (int c : bsel) den *= Z[it.a] * Z[it.a] - Z[c] * Z[c];
  }
  int sgn_exp = 0;
  for (int i = 0; i < r; ++i) sgn_exp += items[i].a - i;
  const double sgn = (sgn_exp % 2 == 0) ? 1.0 : -1.0;
  std::vector<cx> ea, ext;
  for (const auto& it : items) {
    const cx e = b.eta(it.a, it.k);
    ea.push_back(e * e);
    for (int j = 0; j < p - it.alpha + 1; ++j) ext.push_back(e * e * ph.qpow(2 * j));
  }
  const cx f = num / den * sgn * vandermonde_product(ea) / vandermonde_product(ext);
  const double nsign = ((n * (n - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  return std::pow(as.ap, h0) * ph.qpow(h0 * tp.k()) / std::pow(b.grid().etaN0, h) * f * O.determinant() * b.C_N() *
         nsign;
}

/// Elementary form factors for one index over all pairs.
inline std::vector<FormFactorResult> ff_elementary(const ElementaryOps& E, const SovBasis& b,
                                                   const std::vector<SpectralRecord>& recs, int h, int h0,
                                                   const std::vector<ElementaryOps::Item>& items,
                                                   const std::string& tag) {
  const Mat op = E.monomial(h, h0, items);
  std::vector<FormFactorResult> out;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < recs.size(); ++j) {
      const auto &t = recs[i], &tp = recs[j];
      FormFactorResult r{int(i), int(j), t.k(), tp.k(), tag, 0.0, 0.0, 0.0, false};
      r.selected = mod(t.k() - tp.k() - h, b.p()) == 0;
      r.oracle_value = (t.left * op * tp.right)(0, 0);
      r.det_value = elementary_determinant(b, t, tp, h, h0, items);
      r.rel_err = detail::ff_error(r.det_value, r.oracle_value, t.left.norm() * tp.right.norm());
      out.push_back(std::move(r));
    }
  return out;
}

/// Normalization-invariant products I(t,t') = F_u(t,t') F_E(t',t) / (<t|t><t'|t'>), E = eta_N.
struct InvarianceReport {
  double rescale_change = 0.0;  ///< max relative change of I under random Q rescaling
  double oracle_error = 0.0;    ///< max relative deviation of I from the oracle-vector value
  int pairs = 0;
};

inline InvarianceReport normalization_invariance(const Chain& ch, const Amplitudes& am, const SovBasis& b,
                                                 const ElementaryOps& E, std::vector<SpectralRecord> recs, Rng& rng) {
  const int p = b.p();
  const Mat uinv = local_u_inverse(ch, 1);
  const Mat eop = E.monomial(p - 1, 0, {});
  const cx cn = u_inverse_constant(ch, am, 1);
  const cx mu = am.mu_plus()[0];
  auto invariant = [&](const std::vector<SpectralRecord>& rs, std::size_t i, std::size_t j) {
    const cx fu = cn * u_matrix(b, rs[i].tables, rs[j].tables, rs[j].k(), mu).determinant();
    const cx fe = elementary_determinant(b, rs[j], rs[i], p - 1, 0, {});
    return fu * fe / (eigen_norm(b, rs[i]) * eigen_norm(b, rs[j]));
  };
  std::vector<SpectralRecord> scaled = recs;
  for (auto& r : scaled)
    for (int a = 0; a < b.n_sites() - 1; ++a) {
      r.tables.Q[a] *= rng.annulus();
      r.tables.Qbar[a] *= rng.annulus();
    }
  InvarianceReport rep;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < recs.size(); ++j) {
      if (mod(recs[i].k() - recs[j].k() - 1, p) != 0) continue;
      const auto& t = recs[i];
      const auto& tp = recs[j];
      const cx ora = (t.oracle_left * uinv * tp.oracle_right)(0, 0) * (tp.oracle_left * eop * t.oracle_right)(0, 0) /
                     ((t.oracle_left * t.oracle_right)(0, 0) * (tp.oracle_left * tp.oracle_right)(0, 0));
      const cx v0 = invariant(recs, i, j), v1 = invariant(scaled, i, j);
      if (std::abs(ora) < 1e-10) continue;
      ++rep.pairs;
      rep.rescale_change = std::max(rep.rescale_change, std::abs(v1 - v0) / std::abs(v0));
      rep.oracle_error = std::max(rep.oracle_error, std::abs(v0 - ora) / std::abs(ora));
    }
  return rep;
}

/// von Gehlen-Rittenberg Hamiltonian H = H0 + k' H1 for the homogeneous point Q.
struct VgrHamiltonian {
  Mat H, H0, H1;
  cx cos_theta, cos_theta_bar;
};

inline VgrHamiltonian build_vgr_hamiltonian(const Phase& ph, int N, const CurvePoint& Q) {
  const int p = ph.p;
  const cx q = ph.q, zeta = -1.0 / q;
  const cx EX = std::sqrt(-q * Q.y / Q.x);
  cx EY = std::sqrt(-Q.x * Q.s * Q.s / Q.y / q);
  VgrHamiltonian out;
  out.cos_theta = 0.5 * (std::pow(EX, p) + std::pow(EX, -p));
  cx cthb = 0.5 * (std::pow(EY, p) + std::pow(EY, -p));
  if (std::abs(-cthb * Q.kp - out.cos_theta) < std::abs(cthb * Q.kp - out.cos_theta)) {
    EY = -EY;
    cthb = -cthb;
  }
  out.cos_theta_bar = cthb;
  const Mat u = local_u(ph), X = mat_power(local_v(ph), p - 2);
  const int dim = ipow(p, N);
  out.H0 = Mat::Zero(dim, dim);
  out.H1 = Mat::Zero(dim, dim);
  for (int r = 1; r < p; ++r) {
    const cx sig = (std::pow(zeta, r) - std::pow(zeta, -r)) / (2.0 * I);
    const Mat ur = mat_power(u, r), upr = mat_power(u, p - r), xr = mat_power(X, r);
    for (int n = 1; n <= N; ++n) {
      out.H0 += std::pow(EX, 2 * r - p) / sig * site_op(ur, n, N, p) * site_op(upr, n % N + 1, N, p);
      out.H1 += std::pow(EY, 2 * r - p) / sig * site_op(xr, n, N, p);
    }
  }
  out.H = out.H0 + Q.kp * out.H1;
  return out;
}

/// Lowest-H states of each Theta sector and the adjacent-sector u_1^{-1} table.
struct OrderParameterRow {
  int k = 0;  ///< right sector; left sector is k+1
  cx det_value, oracle_value;
  double rel_err = 0.0;
  double magnitude = 0.0;  ///< sqrt(|<t|u^{-1}|t'><t'|u|t>| / |<t|t><t'|t'>|)
};

inline std::vector<OrderParameterRow> order_parameter_table(const Chain& ch, const Amplitudes& am, const SovBasis& b,
                                                            const std::vector<SpectralRecord>& recs, const Mat& H) {
  const int p = b.p();
  std::vector<int> gs(p, -1);
  std::vector<double> e(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    e[i] = ((r.left * H * r.right)(0, 0) / (r.left * r.right)(0, 0)).real();
    if (gs[r.k()] < 0 || e[i] < e[gs[r.k()]]) gs[r.k()] = int(i);
  }
  const Mat uinv = local_u_inverse(ch, 1), u = uinv.inverse();
  const cx cn = u_inverse_constant(ch, am, 1);
  std::vector<OrderParameterRow> rows;
  for (int k = 0; k < p; ++k) {
    const auto& t = recs[gs[mod(k + 1, p)]];
    const auto& tp = recs[gs[k]];
    OrderParameterRow row;
    row.k = k;
    row.oracle_value = (t.left * uinv * tp.right)(0, 0);
    row.det_value = cn * u_matrix(b, t.tables, tp.tables, tp.k(), am.mu_plus()[0]).determinant();
    row.rel_err = std::abs(row.det_value - row.oracle_value) / std::abs(row.oracle_value);
    const cx back = (tp.left * u * t.right)(0, 0);
    row.magnitude = std::sqrt(std::abs(row.oracle_value * back) /
                              std::abs((t.left * t.right)(0, 0) * (tp.left * tp.right)(0, 0)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sovlat
