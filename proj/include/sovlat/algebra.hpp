/**
 * @file algebra.hpp
 * @brief Lax operators, monodromy, quantum determinant, averages and amplitudes.
 */
#pragma once

#include "sovlat/model.hpp"

#include <array>
#include <optional>

namespace sovlat {

/// Operator-valued 2x2 matrix.
struct Op2 {
  Mat A, B, C, D;
  Mat tau2() const { return A + D; }
};

/// Average matrix L_N(Lambda) ... L_1(Lambda) built from site averages.
inline Eigen::Matrix2cd average_matrix(const ModelParams& m, cx Lambda) {
  if (Lambda == cx(0.0)) throw std::invalid_argument("average argument must be nonzero");
  const int p = m.phase.p;
  const cx qhp = std::pow(m.phase.q_half, p);
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Identity();
  for (const SiteParams& s : m.sites) {
    Eigen::Matrix2cd L;
    L << Lambda * std::pow(s.alpha, p) - std::pow(s.beta, p) / Lambda, qhp * (std::pow(s.a, p) + std::pow(s.b, p)),
        qhp * (std::pow(s.c, p) + std::pow(s.d, p)), std::pow(s.gamma, p) / Lambda - Lambda * std::pow(s.delta, p);
    M = L * M;
  }
  return M;
}

inline cx site_qdet(const SiteParams& s, cx lambda, cx q) {
  return (-q) * s.beta * s.a * s.c / s.alpha * (1.0 / lambda + s.b * s.alpha / (s.a * s.beta) * lambda / q) *
         (1.0 / lambda + s.d * s.alpha / (s.c * s.beta) * lambda / q);
}

/// Model plus cached embedded local operators.
class Chain {
 public:
  explicit Chain(ModelParams params) : m_(std::move(params)) {
    const Phase& ph = m_.phase;
    const int N = m_.n_sites, p = ph.p;
    Mat u = local_u(ph), v = local_v(ph);
    Mat ui = u.adjoint(), vi = v.adjoint();
    theta_ = Mat::Identity(dim(), dim());
    for (int n = 1; n <= N; ++n) {
      const SiteParams& s = m_.sites[n - 1];
      Local loc;
      loc.v = site_op(v, n, N, p);
      loc.vi = site_op(vi, n, N, p);
      loc.x12 = site_op(u * (s.a * v / ph.q_half + ph.q_half * s.b * vi), n, N, p);
      loc.x21 = site_op(ui * (ph.q_half * s.c * v + s.d * vi / ph.q_half), n, N, p);
      theta_ = theta_ * loc.v;
      loc_.push_back(std::move(loc));
    }
  }

  const ModelParams& params() const { return m_; }
  const Phase& phase() const { return m_.phase; }
  int p() const { return m_.phase.p; }
  int n_sites() const { return m_.n_sites; }
  int dim() const { return m_.dim(); }
  const SiteParams& site(int n) const { return m_.sites[n - 1]; }
  const Mat& theta() const { return theta_; }

  /// L_n(lambda), n 1-based.
  Op2 lax(int n, cx lambda) const {
    if (lambda == cx(0.0)) throw std::invalid_argument("spectral parameter must be nonzero");
    const SiteParams& s = site(n);
    const Local& l = loc_[n - 1];
    return {lambda * s.alpha * l.v - s.beta / lambda * l.vi, l.x12, l.x21, s.gamma / lambda * l.v - s.delta * lambda * l.vi};
  }

  /// M(lambda) = L_{order.back()} ... L_{order.front()}; default order 1..N.
  Op2 monodromy(cx lambda, const std::vector<int>& order = {}) const {
    std::vector<int> ord = order;
    if (ord.empty())
      for (int n = 1; n <= n_sites(); ++n) ord.push_back(n);
    Op2 M{Mat::Identity(dim(), dim()), Mat::Zero(dim(), dim()), Mat::Zero(dim(), dim()), Mat::Identity(dim(), dim())};
    bool first = true;
    for (int n : ord) {
      Op2 L = lax(n, lambda);
      if (first) {
        M = L;
        first = false;
        continue;
      }
      Op2 R{L.A * M.A + L.B * M.C, L.A * M.B + L.B * M.D, L.C * M.A + L.D * M.C, L.C * M.B + L.D * M.D};
      M = std::move(R);
    }
    return M;
  }

  /// Monodromy ordered as L_{m-1} ... L_1 L_N ... L_m.
  Op2 shifted_monodromy(cx lambda, int m) const {
    std::vector<int> ord;
    for (int n = m; n <= n_sites(); ++n) ord.push_back(n);
    for (int n = 1; n < m; ++n) ord.push_back(n);
    return monodromy(lambda, ord);
  }

  Mat tau2(cx lambda) const { return monodromy(lambda).tau2(); }

  /// Closed-form quantum determinant.
  cx qdet(cx lambda) const {
    cx val = 1.0;
    const cx q = phase().q;
    for (const SiteParams& s : m_.sites)
      val *= site_qdet(s, lambda, q);
    return val;
  }

  /// A(lambda) D(lambda/q) - B(lambda) C(lambda/q).
  Mat qdet_operator(cx lambda) const {
    Op2 M1 = monodromy(lambda), M2 = monodromy(lambda / phase().q);
    return M1.A * M2.D - M1.B * M2.C;
  }

  Eigen::Matrix2cd average_matrix(cx Lambda) const { return sovlat::average_matrix(m_, Lambda); }

  /// prod_{k=1}^p O(q^k lambda) for each monodromy entry.
  Op2 average_operators(cx lambda) const {
    Op2 P{Mat::Identity(dim(), dim()), Mat::Identity(dim(), dim()), Mat::Identity(dim(), dim()), Mat::Identity(dim(), dim())};
    for (int k = 1; k <= p(); ++k) {
      Op2 M = monodromy(phase().qpow(k) * lambda);
      P.A = P.A * M.A;
      P.B = P.B * M.B;
      P.C = P.C * M.C;
      P.D = P.D * M.D;
    }
    return P;
  }

 private:
  struct Local {
    Mat v, vi, x12, x21;
  };
  ModelParams m_;
  std::vector<Local> loc_;
  Mat theta_;
};

/// Six-vertex R-matrix acting on C^2 (x) C^2.
inline Eigen::Matrix4cd r_matrix(cx lambda, cx q) {
  Eigen::Matrix4cd R = Eigen::Matrix4cd::Zero();
  const cx x = lambda - 1.0 / lambda, y = q * lambda - 1.0 / (q * lambda), z = q - 1.0 / q;
  R(0, 0) = y;
  R(1, 1) = x;
  R(1, 2) = z;
  R(2, 1) = z;
  R(2, 2) = x;
  R(3, 3) = y;
  return R;
}

/// Relative residual of R(l/m)(M(l) x 1)(1 x M(m)) = (1 x M(m))(M(l) x 1)R(l/m).
inline double yang_baxter_residual(const Chain& ch, cx lambda, cx mu) {
  const int d = ch.dim();
  Op2 Ml = ch.monodromy(lambda), Mm = ch.monodromy(mu);
  const Mat* el[2][2] = {{&Ml.A, &Ml.B}, {&Ml.C, &Ml.D}};
  const Mat* em[2][2] = {{&Mm.A, &Mm.B}, {&Mm.C, &Mm.D}};
  // Block (i1 i2, j1 j2) of the 4d x 4d operators, auxiliary index 2*i1+i2.
  Mat op1 = Mat::Zero(4 * d, 4 * d), op2 = Mat::Zero(4 * d, 4 * d);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        op1.block((2 * i + k) * d, (2 * j + k) * d, d, d) = *el[i][j];
        op2.block((2 * k + i) * d, (2 * k + j) * d, d, d) = *em[i][j];
      }
  Mat R = kron(Mat(r_matrix(lambda / mu, ch.phase().q)), Mat::Identity(d, d));
  Mat lhs = R * op1 * op2, rhs = op2 * op1 * R;
  return rel(lhs - rhs, lhs.norm());
}

/// Quantum-determinant zeros, amplitude functions a, d and the average eigenvalues.
class Amplitudes {
 public:
  explicit Amplitudes(const ModelParams& m) : m_(m) {
    const cx q = m.phase.q, qh = m.phase.q_half;
    for (const SiteParams& s : m.sites) {
      mu_plus_.push_back(I * qh * std::sqrt(s.a * s.beta / (s.alpha * s.b)));
      mu_minus_.push_back(I * qh * std::sqrt(s.c * s.beta / (s.alpha * s.d)));
      // Per-site sign fixed so that a_n(l) d_n(l/q) reproduces the site quantum determinant.
      cx kn = std::sqrt(s.a * s.b * s.c * s.d / (s.alpha * s.beta));
      const cx lam(1.1, 0.3);
      cx an = std::sqrt(s.beta * s.alpha) * (lam / mu_plus_.back() - mu_plus_.back() / lam);
      cx dn = kn * (lam / mu_minus_.back() - mu_minus_.back() / lam);
      if (std::abs(an * dn / site_qdet(s, lam, q) + 1.0) < 1e-6) kn = -kn;
      k_.push_back(kn);
    }
  }

  const std::vector<cx>& mu_plus() const { return mu_plus_; }
  const std::vector<cx>& mu_minus() const { return mu_minus_; }
  const std::vector<cx>& k() const { return k_; }

  cx a(cx lambda) const {
    cx v = 1.0;
    for (std::size_t n = 0; n < m_.sites.size(); ++n) {
      const SiteParams& s = m_.sites[n];
      v *= std::sqrt(s.beta * s.alpha) * (lambda / mu_plus_[n] - mu_plus_[n] / lambda);
    }
    return v;
  }

  cx d(cx lambda) const {
    const cx q = m_.phase.q;
    cx v = 1.0;
    for (std::size_t n = 0; n < m_.sites.size(); ++n) v *= k_[n] * (q * lambda / mu_minus_[n] - mu_minus_[n] / (q * lambda));
    return v;
  }

  /// Omega_eps(Lambda) = (tr + eps sqrt(tr^2 - 4 det))/2 of the average matrix.
  cx omega(cx Lambda, int eps) const {
    Eigen::Matrix2cd M = average_matrix(m_, Lambda);
    const cx tr = M.trace(), det = M.determinant();
    return 0.5 * (tr + double(eps) * std::sqrt(tr * tr - 4.0 * det));
  }

  /// Orbit constant alpha with alpha^p = target / prod_{n=1}^p a(q^n lambda0), principal root.
  cx orbit_constant(cx lambda0, cx target) const {
    cx prod = 1.0;
    for (int n = 1; n <= m_.phase.p; ++n) prod *= a(m_.phase.qpow(n) * lambda0);
    return std::pow(target / prod, 1.0 / m_.phase.p);
  }

  cx orbit_constant_eps(cx lambda0, int eps) const {
    return orbit_constant(lambda0, omega(std::pow(lambda0, m_.phase.p), eps));
  }

  /// Asymptotic constants a_+, a_-, d_+, d_-.
  struct Asym {
    cx ap, am, dp, dm;
  };
  Asym asymptotics() const {
    Asym r{1.0, 1.0, 1.0, 1.0};
    const int N = m_.n_sites;
    for (const SiteParams& s : m_.sites) {
      r.ap *= s.alpha;
      r.am *= s.beta;
      r.dp *= s.delta;
      r.dm *= s.gamma;
    }
    const double sg = (N % 2 == 0) ? 1.0 : -1.0;
    r.am *= sg;
    r.dp *= sg;
    return r;
  }

 private:
  ModelParams m_;
  std::vector<cx> mu_plus_, mu_minus_, k_;
};

}  // namespace sovlat
