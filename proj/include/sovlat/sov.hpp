/**
 * @file sov.hpp
 * @brief B-eigenbasis, separate-variable grid, gauge-fixed left/right SOV bases and measure.
 */
#pragma once

#include "sovlat/algebra.hpp"
#include "sovlat/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <map>

namespace sovlat {

struct SovGrid {
  std::vector<cx> eta0;       ///< eta_a^{(0)}, a = 1..N-1 (0-based storage)
  std::vector<cx> Z;          ///< (eta_a^{(0)})^p
  cx etaN0;                   ///< eta_N^{(0)}
  std::vector<Label> labels;  ///< label of raw eigenvector i
  Mat R;                      ///< raw right eigenvectors (columns)
  Mat L;                      ///< raw left eigenvectors (rows), L = R^{-1}
  cx lambda0;
  double fit_error = 0.0;     ///< worst relative error of the fitted eigenvalue functions at a fresh point
  int retries = 0;
};

/// Rotates z by powers of w (a primitive p-th root) into the argument window [-1e-3, 2 pi/p - 1e-3).
inline cx canonical_root(cx z, int p) {
  const double width = 2.0 * kPi / p;
  double a = std::arg(z) + 1e-3;
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  const int k = int(std::floor(a / width));
  return z * std::polar(1.0, -width * k);
}

/// Roots of c_0 + c_1 x + ... + c_n x^n via the companion matrix.
inline std::vector<cx> poly_roots(const std::vector<cx>& c) {
  const int n = int(c.size()) - 1;
  if (n <= 0) return {};
  Mat comp = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  Eigen::ComplexEigenSolver<Mat> es(comp);
  std::vector<cx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return r;
}

/// Least-squares solution of X c = y.
inline Vec lstsq(const Mat& X, const Vec& y) { return X.colPivHouseholderQr().solve(y); }

/// Fits lambda^{N-1} b(lambda) as a polynomial in lambda^2 from eigenvalue samples.
inline std::vector<cx> fit_b_polynomial(const std::vector<cx>& lams, const std::vector<cx>& vals, int N) {
  Mat X(lams.size(), N);
  Vec y(lams.size());
  for (std::size_t i = 0; i < lams.size(); ++i) {
    cx x = lams[i] * lams[i];
    cx pw = 1.0;
    for (int j = 0; j < N; ++j) {
      X(i, j) = pw;
      pw *= x;
    }
    y(i) = vals[i] * std::pow(lams[i], N - 1);
  }
  Vec c = lstsq(X, y);
  return std::vector<cx>(c.data(), c.data() + c.size());
}

/// Sample points on |lambda| in {0.9, 1.3}, N+1 per circle.
inline std::vector<cx> b_sample_points(int N) {
  std::vector<cx> out;
  for (double r : {0.9, 1.3})
    for (int j = 0; j <= N; ++j) out.push_back(std::polar(r, 2.0 * kPi * j / (2.0 * N) + 0.3));
  return out;
}

/// Diagonalizes B(lambda0), fits every eigenvalue function and extracts the SOV grid.
inline SovGrid diagonalize_b_family(const Chain& ch, Rng& rng, int max_retries = 5) {
  const int N = ch.n_sites(), p = ch.p(), dim = ch.dim();
  const Phase& ph = ch.phase();
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    SovGrid g;
    g.retries = attempt;
    g.lambda0 = std::polar(1.1, rng.uniform(0.0, 2.0 * kPi));
    Mat B0 = ch.monodromy(g.lambda0).B;
    Eigen::ComplexEigenSolver<Mat> es(B0);
    const Vec w = es.eigenvalues();
    double gap = 1e300;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < i; ++j) gap = std::min(gap, std::abs(w(i) - w(j)) / std::max(std::abs(w(i)), std::abs(w(j))));
    if (gap < 1e-6) continue;
    g.R = es.eigenvectors();
    g.L = g.R.inverse();

    const std::vector<cx> lams = b_sample_points(N);
    std::vector<Mat> Bs;
    for (cx l : lams) Bs.push_back(ch.monodromy(l).B);
    std::vector<std::vector<cx>> roots(dim);
    std::vector<cx> lead(dim);
    for (int i = 0; i < dim; ++i) {
      std::vector<cx> vals;
      for (const Mat& B : Bs) vals.push_back((g.L.row(i) * B * g.R.col(i))(0, 0));
      std::vector<cx> c = fit_b_polynomial(lams, vals, N);
      roots[i] = poly_roots(c);
      lead[i] = c.back();
    }
    // Cluster eta^2 values into q-orbits by equality of eta^{2p}.
    std::vector<cx> reps;
    for (const auto& rt : roots)
      for (cx r : rt) {
        cx z = std::pow(r, p);
        bool found = false;
        for (cx rep : reps)
          if (std::abs(std::pow(rep, p) - z) < 1e-6 * std::abs(z)) found = true;
        if (!found) reps.push_back(canonical_root(r, p));
      }
    if (int(reps.size()) != N - 1) continue;
    std::sort(reps.begin(), reps.end(), [](cx x, cx y) {
      if (std::abs(std::abs(x) - std::abs(y)) > 1e-9 * std::abs(x)) return std::abs(x) < std::abs(y);
      return std::arg(x) < std::arg(y);
    });
    for (cx r : reps) {
      g.eta0.push_back(std::sqrt(r));
      g.Z.push_back(std::pow(g.eta0.back(), p));
    }
    std::vector<cx> etaN(dim);
    g.labels.assign(dim, Label(N, 0));
    bool ok = true;
    try {
      for (int i = 0; i < dim; ++i) {
        cx prod = 1.0;
        std::vector<bool> seen(N - 1, false);
        for (cx r : roots[i]) {
          int a = -1;
          for (int j = 0; j < N - 1; ++j)
            if (std::abs(std::pow(r, p) - std::pow(reps[j], p)) < 1e-6 * std::abs(std::pow(reps[j], p))) a = j;
          if (a < 0 || seen[a]) throw NonGenericError("zero outside the grid orbits");
          seen[a] = true;
          const int k = Phase::nearest_power(r / (g.eta0[a] * g.eta0[a]), ph.q * ph.q, p);
          g.labels[i][a] = k;
          prod *= ph.qpow(k) * g.eta0[a];
        }
        etaN[i] = lead[i] * prod;
      }
      g.etaN0 = canonical_root(etaN[0], p);
      for (int i = 0; i < dim; ++i) g.labels[i][N - 1] = Phase::nearest_power(etaN[i] / g.etaN0, ph.q, p);
    } catch (const NonGenericError&) {
      ok = false;
    }
    if (!ok) continue;
    std::vector<Label> sorted = g.labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;

    // Re-evaluation at a fresh point.
    const cx l1 = std::polar(1.07, 1.234);
    Mat B1 = ch.monodromy(l1).B;
    for (int i = 0; i < dim; ++i) {
      cx pred = etaN[i];
      for (int a = 0; a < N - 1; ++a) {
        cx e = ph.qpow(g.labels[i][a]) * g.eta0[a];
        pred *= l1 / e - e / l1;
      }
      Vec lhs = B1 * g.R.col(i);
      g.fit_error = std::max(g.fit_error, (lhs - pred * g.R.col(i)).norm() / lhs.norm());
    }
    return g;
  }
  throw NonGenericError("non-simple B spectrum: grid extraction failed after retries");
}

/// Relative separation min_{a<b} |Z_a - Z_b| / max |Z|; 1 when N = 2.
inline double z_separation(const SovGrid& g) {
  double mx = 0.0, mn = 1e300;
  for (cx z : g.Z) mx = std::max(mx, std::abs(z));
  for (std::size_t a = 0; a < g.Z.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) mn = std::min(mn, std::abs(g.Z[a] - g.Z[b]));
  return g.Z.size() < 2 ? 1.0 : mn / mx;
}

/// Gauge-fixed left and right SOV bases.
class SovBasis {
 public:
  SovBasis(const Chain& ch, const Amplitudes& amps, SovGrid grid)
      : ph_(ch.phase()), N_(ch.n_sites()), amps_(amps), grid_(std::move(grid)) {
    const int p = ph_.p, dim = ch.dim();
    C_N_ = (((N_ - 1) * (N_ - 2) / 2) % 2 == 0) ? 1.0 : -1.0;
    for (cx e : grid_.eta0) alpha_.push_back(amps_.orbit_constant(e, ch.average_matrix(std::pow(e, p))(0, 0)));

    std::vector<int> raw(dim);
    for (int i = 0; i < dim; ++i) raw[label_index(grid_.labels[i], p)] = i;
    const Label ref(N_, 0);
    Vec r0 = grid_.R.col(raw[0]);
    const double mx = r0.cwiseAbs().maxCoeff();
    for (int i = 0; i < dim; ++i)
      if (std::abs(r0(i)) > 1e-8 * mx) {
        r0 /= r0(i);
        break;
      }
    RowVec l0 = grid_.L.row(raw[0]);

    // A(eta_a^{(k)}) for every grid point.
    std::vector<std::vector<Mat>> Ag(N_ - 1);
    for (int a = 0; a < N_ - 1; ++a)
      for (int k = 0; k < p; ++k) Ag[a].push_back(ch.monodromy(eta(a, k)).A);

    right_ = Mat::Zero(dim, dim);
    left_ = Mat::Zero(dim, dim);
    for (int idx = 0; idx < dim; ++idx) {
      const Label lab = label_from_index(idx, p, N_);
      Vec v = r0;
      RowVec w = l0;
      for (int a = 0; a < N_ - 1; ++a) {
        for (int s = 0; s < lab[a]; ++s) v = Ag[a][s] * v / abar(a, ph_.q * eta(a, s));
        int cur = 0;
        for (int s = 0; s < mod(p - lab[a], p); ++s) {
          w = w * Ag[a][cur] / abar(a, eta(a, cur));
          cur = mod(cur - 1, p);
        }
      }
      for (int s = 0; s < lab[N_ - 1]; ++s) v = ch.theta() * v;
      for (int s = 0; s < mod(p - lab[N_ - 1], p); ++s) w = w * ch.theta();
      right_.col(idx) = v;
      left_.row(idx) = w;
    }
    // Left normalization <eta_0|eta_0> = C_N prod omega / V.
    const cx target = C_N_ * omega_product(ref) / vandermonde(ref);
    const cx cur = (left_.row(0) * right_.col(0))(0, 0);
    left_ *= target / cur;
  }

  const Phase& phase() const { return ph_; }
  int p() const { return ph_.p; }
  int n_sites() const { return N_; }
  int dim() const { return ipow(ph_.p, N_); }
  const SovGrid& grid() const { return grid_; }
  const Amplitudes& amplitudes() const { return amps_; }
  const std::vector<cx>& alpha() const { return alpha_; }
  double C_N() const { return C_N_; }

  /// Right vectors |eta_h> as columns, left covectors <eta_h| as rows, indexed by label_index.
  const Mat& right() const { return right_; }
  const Mat& left() const { return left_; }

  /// eta_a^{(k)} for a < N-1; eta_N^{(0)} q^k for a = N-1.
  cx eta(int a, int k) const {
    return a == N_ - 1 ? ph_.qpow(k) * grid_.etaN0 : ph_.qpow(k) * grid_.eta0[a];
  }
  std::vector<cx> etas(const Label& h) const {
    std::vector<cx> e(N_);
    for (int a = 0; a < N_; ++a) e[a] = eta(a, h[a]);
    return e;
  }
  cx abar(int a, cx lam) const { return alpha_[a] * amps_.a(lam); }
  cx dbar(int a, cx lam) const { return amps_.d(lam) / alpha_[a]; }
  cx omega(cx e) const { return std::pow(e, N_ - 2); }

  cx vandermonde(const Label& h) const {
    cx v = 1.0;
    for (int a = 0; a < N_ - 1; ++a)
      for (int b = a + 1; b < N_ - 1; ++b) {
        cx ea = eta(a, h[a]), eb = eta(b, h[b]);
        v *= ea * ea - eb * eb;
      }
    return v;
  }
  cx omega_product(const Label& h) const {
    cx v = 1.0;
    for (int a = 0; a < N_ - 1; ++a) v *= omega(eta(a, h[a]));
    return v;
  }

  /// Measure weight mu_h of the SOV decomposition of the identity.
  cx measure(const Label& h) const { return vandermonde(h) / (C_N_ * omega_product(h)); }

  /// B eigenvalue on |eta_h>.
  cx b_value(const Label& h, cx lam) const {
    cx v = eta(N_ - 1, h[N_ - 1]);
    for (int a = 0; a < N_ - 1; ++a) {
      cx e = eta(a, h[a]);
      v *= lam / e - e / lam;
    }
    return v;
  }

 private:
  Phase ph_;
  int N_;
  Amplitudes amps_;
  SovGrid grid_;
  std::vector<cx> alpha_;
  double C_N_ = 1.0;
  Mat right_, left_;
};

/// Measure weights from the closed form and from direct pairings.
struct MeasureComparison {
  std::vector<cx> formula, direct;
  double ratio_spread = 0.0;    ///< max |ratio/ratio_0 - 1|
  double off_diagonal = 0.0;    ///< max |<eta_k|eta_h>| / (||.|| ||.||), k != h
};

inline MeasureComparison sov_measure(const SovBasis& b) {
  MeasureComparison mc;
  const int dim = b.dim();
  Mat G = b.left() * b.right();
  for (int i = 0; i < dim; ++i) {
    const Label h = label_from_index(i, b.p(), b.n_sites());
    mc.formula.push_back(b.measure(h));
    mc.direct.push_back(1.0 / G(i, i));
  }
  const cx r0 = mc.formula[0] / mc.direct[0];
  for (int i = 0; i < dim; ++i) {
    mc.ratio_spread = std::max(mc.ratio_spread, std::abs(mc.formula[i] / mc.direct[i] / r0 - 1.0));
    for (int j = 0; j < dim; ++j)
      if (i != j)
        mc.off_diagonal = std::max(mc.off_diagonal, std::abs(G(i, j)) / (b.left().row(i).norm() * b.right().col(j).norm()));
  }
  return mc;
}

/// Sum_h mu_h |eta_h><eta_h|.
inline Mat decompose_identity(const SovBasis& b) {
  Vec mu(b.dim());
  for (int i = 0; i < b.dim(); ++i) mu(i) = b.measure(label_from_index(i, b.p(), b.n_sites()));
  return b.right() * mu.asDiagonal() * b.left();
}

/// Gauge pair used in the left representation: a^{SOV}, d^{SOV} as functions of (a, eta).
using GaugeFn = std::function<cx(int, cx)>;

/// Max relative residual of the left A (op = 0) or D (op = 1) action against the SOV representation.
inline double left_action_residual(const Chain& ch, const SovBasis& b, const Mat& left, int op, cx lam,
                                   const GaugeFn& gauge) {
  const int N = b.n_sites(), p = b.p();
  const auto as = b.amplitudes().asymptotics();
  Op2 M = ch.monodromy(lam);
  const Mat& O = op == 0 ? M.A : M.D;
  double err = 0.0;
  for (int idx = 0; idx < b.dim(); ++idx) {
    const Label k = label_from_index(idx, p, N);
    std::vector<cx> e = b.etas(k);
    cx bb = 1.0, P = 1.0;
    for (int a = 0; a < N - 1; ++a) {
      bb *= lam / e[a] - e[a] / lam;
      P *= e[a];
    }
    const double sgn = (N - 1) % 2 == 0 ? 1.0 : -1.0;
    const cx ep = (op == 0 ? as.ap : as.dp) * P, em = sgn * (op == 0 ? as.am : as.dm) / P;
    const int dN = op == 0 ? -1 : 1;
    RowVec rhs = bb * (lam * ep * left.row(label_index(shifted(k, N - 1, dN, p), p)) +
                       em / lam * left.row(label_index(shifted(k, N - 1, -dN, p), p)));
    for (int a = 0; a < N - 1; ++a) {
      cx fac = 1.0;
      for (int c = 0; c < N - 1; ++c)
        if (c != a) fac *= (lam / e[c] - e[c] / lam) / (e[a] / e[c] - e[c] / e[a]);
      const int da = op == 0 ? -1 : 1;
      rhs += fac * gauge(a, e[a]) * left.row(label_index(shifted(k, a, da, p), p));
    }
    RowVec lhs = left.row(idx) * O;
    err = std::max(err, (lhs - rhs).norm() / lhs.norm());
  }
  return err;
}

/// Max relative residual of the right A (op = 0) or D (op = 1) action.
inline double right_action_residual(const Chain& ch, const SovBasis& b, int op, cx lam) {
  const int N = b.n_sites(), p = b.p();
  const auto as = b.amplitudes().asymptotics();
  const cx q = b.phase().q;
  Op2 M = ch.monodromy(lam);
  const Mat& O = op == 0 ? M.A : M.D;
  double err = 0.0;
  for (int idx = 0; idx < b.dim(); ++idx) {
    const Label k = label_from_index(idx, p, N);
    std::vector<cx> e = b.etas(k);
    cx bb = 1.0, P = 1.0;
    for (int a = 0; a < N - 1; ++a) {
      bb *= lam / e[a] - e[a] / lam;
      P *= e[a];
    }
    const double sgn = (N - 1) % 2 == 0 ? 1.0 : -1.0;
    const cx ep = (op == 0 ? as.ap : as.dp) * P, em = sgn * (op == 0 ? as.am : as.dm) / P;
    const int dN = op == 0 ? 1 : -1;
    Vec rhs = bb * (lam * ep * b.right().col(label_index(shifted(k, N - 1, dN, p), p)) +
                    em / lam * b.right().col(label_index(shifted(k, N - 1, -dN, p), p)));
    for (int a = 0; a < N - 1; ++a) {
      cx fac = 1.0;
      for (int c = 0; c < N - 1; ++c)
        if (c != a) fac *= (lam / e[c] - e[c] / lam) / (e[a] / e[c] - e[c] / e[a]);
      const cx coef = op == 0 ? b.abar(a, q * e[a]) : b.dbar(a, e[a] / q);
      const int da = op == 0 ? 1 : -1;
      rhs += fac * coef * b.right().col(label_index(shifted(k, a, da, p), p));
    }
    Vec lhs = O * b.right().col(idx);
    err = std::max(err, (lhs - rhs).norm() / lhs.norm());
  }
  return err;
}

/// Left action residual in the fixed gauge (a^{SOV}, d^{SOV}) = (abar, dbar).
inline double left_action_residual(const Chain& ch, const SovBasis& b, int op, cx lam) {
  GaugeFn g = op == 0 ? GaugeFn([&b](int a, cx e) { return b.abar(a, e); }) : GaugeFn([&b](int a, cx e) { return b.dbar(a, e); });
  return left_action_residual(ch, b, b.left(), op, lam, g);
}

/// Retry policy shared by all suites: resample when the grid is degenerate or ill-conditioned.
struct GenericityGate {
  double min_z_separation = 0.1;
  double max_condition = 1e3;
};

}  // namespace sovlat
