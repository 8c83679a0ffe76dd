/**
 * @file local_ops.hpp
 * @brief Quantum inverse problem, power expansions of B^{-1}A, q-multinomials and elementary operators.
 */
#pragma once

#include "sovlat/sov.hpp"

namespace sovlat {

/// Symmetric q-integer [n] = (q^n - q^{-n}) / (q - q^{-1}).
inline cx q_int(int n, cx q) { return (std::pow(q, n) - std::pow(q, -n)) / (q - 1.0 / q); }

/// Symmetric q-binomial by the q-Pascal rule [n,k] = q^k [n-1,k] + q^{-(n-k)} [n-1,k-1].
inline cx q_binomial(int n, int k, cx q) {
  if (k < 0 || k > n) return 0.0;
  std::vector<cx> row{1.0};
  for (int m = 1; m <= n; ++m) {
    std::vector<cx> next(m + 1, 0.0);
    for (int j = 0; j <= m; ++j) {
      if (j < m) next[j] += std::pow(q, j) * row[j];
      if (j > 0) next[j] += std::pow(q, -(m - j)) * row[j - 1];
    }
    row = std::move(next);
  }
  return row[k];
}

/// q-multinomial [m; a_1, ..., a_r] as a product of q-binomials (no division by [p]! = 0).
inline cx q_multinomial(const std::vector<int>& parts, cx q) {
  cx v = 1.0;
  int s = 0;
  for (int a : parts) {
    s += a;
    v *= q_binomial(s, a, q);
  }
  return v;
}

/// Worst deviation between q_multinomial and the word enumeration q^{-sum_{i<j} n_i n_j} sum_w q^{2 inv(w)} over
/// every composition of n <= p into three parts, and the worst |[p; n]| over compositions of p with no part equal to p.
struct QMultinomialCheck {
  double enumeration = 0.0, vanishing = 0.0;
  int compositions = 0;
};
inline QMultinomialCheck q_multinomial_enumeration(const Phase& ph) {
  const int p = ph.p;
  QMultinomialCheck r;
  for (int n = 1; n <= p; ++n)
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const std::vector<int> parts{i, j, n - i - j};
        cx sum = 0.0;
        int total = 1;
        for (int s = 0; s < n; ++s) total *= 3;
        for (int w = 0; w < total; ++w) {
          std::vector<int> word(n), cnt(3, 0);
          for (int s = 0, x = w; s < n; ++s, x /= 3) ++cnt[word[s] = x % 3];
          if (cnt != parts) continue;
          int inv = 0;
          for (int s = 0; s < n; ++s)
            for (int t = s + 1; t < n; ++t) inv += word[s] > word[t];
          sum += ph.qpow(2 * inv);
        }
        const int cross = parts[0] * parts[1] + parts[0] * parts[2] + parts[1] * parts[2];
        const cx enumerated = sum * ph.qpow(-cross);
        const cx formula = q_multinomial(parts, ph.q);
        r.enumeration = std::max(r.enumeration, std::abs(enumerated - formula) / std::max(1.0, std::abs(enumerated)));
        ++r.compositions;
        if (n == p && i != p && j != p && n - i - j != p) r.vanishing = std::max(r.vanishing, std::abs(formula));
      }
  return r;
}

/// Propagators U_n^{-1} per site; identity where no propagator is available.
struct ReconstructionContext {
  const Chain* chain = nullptr;
  const Amplitudes* amps = nullptr;
  std::vector<Mat> U_inv;  ///< index n-1

  Mat U(int n) const { return U_inv[n - 1].inverse(); }
};

inline ReconstructionContext make_context(const Chain& ch, const Amplitudes& am, std::vector<Mat> uinv = {}) {
  ReconstructionContext c{&ch, &am, std::move(uinv)};
  if (c.U_inv.empty()) c.U_inv.assign(ch.n_sites(), Mat::Identity(ch.dim(), ch.dim()));
  return c;
}

inline Mat local_u_inverse(const Chain& ch, int n) {
  return site_op(Mat(local_u(ch.phase()).adjoint()), n, ch.n_sites(), ch.p());
}

/// Closed-form alpha_{0,n} = c u (1 + q^{-1}(a/b) v^2)(1 + q^{-1}(c/d) v^2)^{-1}, c = -mu_- b q^{-1/2}/beta.
inline Mat direct_alpha0(const Chain& ch, const Amplitudes& am, int n) {
  const Phase& ph = ch.phase();
  const SiteParams& s = ch.site(n);
  const int p = ph.p;
  Mat v = local_v(ph), u = local_u(ph);
  Mat I1 = Mat::Identity(p, p);
  Mat num = I1 + (s.a / s.b) / ph.q * v * v, den = I1 + (s.c / s.d) / ph.q * v * v;
  const cx cst = -am.mu_minus()[n - 1] * s.b / ph.q_half / s.beta;
  return site_op(Mat(cst * u * num * den.inverse()), n, ch.n_sites(), p);
}

/// Constant c_n with u_n^{-1} = c_n U_n B^{-1}A(mu_{n,+}) U_n^{-1}.
inline cx u_inverse_constant(const Chain& ch, const Amplitudes& am, int n) {
  const SiteParams& s = ch.site(n);
  return -am.mu_plus()[n - 1] * s.b / ch.phase().q_half / s.beta;
}

struct TwoForms {
  Mat first, second;
};

/// u_n^{-1} from B^{-1}A(mu_{n,+}) and from D^{-1}C(mu_{n,+}).
inline TwoForms reconstruct_u_inverse(const ReconstructionContext& c, int n) {
  const Op2 M = c.chain->monodromy(c.amps->mu_plus()[n - 1]);
  const cx k = u_inverse_constant(*c.chain, *c.amps, n);
  const Mat U = c.U(n);
  return {k * U * M.B.partialPivLu().solve(M.A) * c.U_inv[n - 1],
          k * U * M.D.partialPivLu().solve(M.C) * c.U_inv[n - 1]};
}

/// alpha_{0,n} from A^{-1}B(mu_{n,-}) and from C^{-1}D(mu_{n,-}).
inline TwoForms reconstruct_alpha0(const ReconstructionContext& c, int n) {
  const Op2 M = c.chain->monodromy(c.amps->mu_minus()[n - 1]);
  const Mat U = c.U(n);
  return {U * M.A.partialPivLu().solve(M.B) * c.U_inv[n - 1], U * M.C.partialPivLu().solve(M.D) * c.U_inv[n - 1]};
}

/// beta_{k,n} = U X^{-k-1} alpha0 X^k U^{-1} with X = A^{-1}B(mu_{n,+}), k = 0..p-1.
inline std::vector<Mat> beta_operators(const ReconstructionContext& c, int n) {
  const Op2 Mp = c.chain->monodromy(c.amps->mu_plus()[n - 1]);
  const Op2 Mm = c.chain->monodromy(c.amps->mu_minus()[n - 1]);
  const Mat X = Mp.A.partialPivLu().solve(Mp.B), Xi = X.inverse();
  const Mat a0 = Mm.A.partialPivLu().solve(Mm.B);
  const Mat U = c.U(n);
  std::vector<Mat> out;
  for (int k = 0; k < c.chain->p(); ++k) out.push_back(U * mat_power(Xi, k + 1) * a0 * mat_power(X, k) * c.U_inv[n - 1]);
  return out;
}

/// rho = mu_{n,-}/mu_{n,+}, realizing (bc/ad)^{1/2}.
inline cx rho_constant(const Amplitudes& am, int n) { return am.mu_minus()[n - 1] / am.mu_plus()[n - 1]; }

/// v_n^{2k} = (1/p)(-d/c)^k (1 + (c/d)^p)/(rho - 1/rho) sum_a q^{k(2a+1)} beta_a.
inline Mat reconstruct_v_even_power(const ReconstructionContext& c, const std::vector<Mat>& betas, int n, int k) {
  const Phase& ph = c.chain->phase();
  const SiteParams& s = c.chain->site(n);
  const cx rho = rho_constant(*c.amps, n);
  const cx pre = std::pow(-s.d / s.c, k) * (1.0 + std::pow(s.c / s.d, ph.p)) / (rho - 1.0 / rho) / double(ph.p);
  if (std::abs(rho - 1.0 / rho) < 1e-12) throw NonGenericError("vanishing prefactor in v^{2k} reconstruction");
  Mat out = Mat::Zero(c.chain->dim(), c.chain->dim());
  for (int a = 0; a < ph.p; ++a) out += ph.qpow(k * (2 * a + 1)) * betas[a];
  return pre * out;
}

/// v^k for odd k through v^k = v^{2h}, h = (k + p)/2.
inline Mat reconstruct_v_power(const ReconstructionContext& c, const std::vector<Mat>& betas, int n, int k) {
  const int p = c.chain->p();
  k = mod(k, p);
  const int h = (k % 2 == 0) ? k / 2 : (k + p) / 2;
  if (mod(h, p) == 0) return Mat::Identity(c.chain->dim(), c.chain->dim());
  return reconstruct_v_even_power(c, betas, n, mod(h, p));
}

/// Relative deviation of sum_a beta_a from p (rho + (c/d)^p/rho)/(1 + (c/d)^p) I.
inline double beta_sum_rule_residual(const ReconstructionContext& c, const std::vector<Mat>& betas, int n) {
  const int p = c.chain->p();
  const SiteParams& s = c.chain->site(n);
  const cx rho = rho_constant(*c.amps, n), cdp = std::pow(s.c / s.d, p);
  const cx val = double(p) * (rho + cdp / rho) / (1.0 + cdp);
  Mat sum = Mat::Zero(c.chain->dim(), c.chain->dim());
  for (const Mat& b : betas) sum += b;
  return (sum - val * Mat::Identity(sum.rows(), sum.cols())).norm() / (std::abs(val) * std::sqrt(double(sum.rows())));
}

/// Max relative deviation of beta_{k,1} from its expansion through B(q^{-i} mu_+) products and (B^{-1}A(mu_-))^{p-1}.
inline double beta_expansion_residual(const Chain& ch, const Amplitudes& am) {
  const Phase& ph = ch.phase();
  const int p = ph.p, d = ch.dim();
  const cx mp = am.mu_plus()[0], mm = am.mu_minus()[0];
  const Op2 Mp = ch.monodromy(mp), Mm = ch.monodromy(mm);
  const Mat X = Mp.A.partialPivLu().solve(Mp.B), Xi = X.inverse();
  const Mat a0 = Mm.A.partialPivLu().solve(Mm.B);
  const Mat BAp = Mp.B.partialPivLu().solve(Mp.A), BAm = Mm.B.partialPivLu().solve(Mm.A);
  const auto avm = ch.average_matrix(std::pow(mm, p)), avp = ch.average_matrix(std::pow(mp, p));
  double err = 0.0;
  for (int k = 0; k < p; ++k) {
    const Mat bk = mat_power(Xi, k + 1) * a0 * mat_power(X, k);
    Mat P1 = Mat::Identity(d, d), P2 = Mat::Identity(d, d);
    for (int i = 1; i <= p - k; ++i) P1 = P1 * ch.monodromy(ph.qpow(-i) * mp).B;
    for (int i = p - k + 1; i <= p; ++i) P2 = P2 * ch.monodromy(ph.qpow(-i) * mp).B;
    const cx den = ph.qpow(k) * mp / mm - ph.qpow(-k) * mm / mp;
    const Mat T1 = avm(0, 1) / (avm(0, 0) * avp(0, 1)) * (mp / mm - mm / mp) / den * BAp * P1 * mat_power(BAm, p - 1) * P2;
    const cx T2 = (ph.qpow(k) - ph.qpow(-k)) / den;
    err = std::max(err, (bk - T1 - T2 * Mat::Identity(d, d)).norm() / bk.norm());
  }
  return err;
}

/// Label-space representation: operators act on SOV covector coefficients, S(O) = L O L^{-1}.
class LabelSpace {
 public:
  explicit LabelSpace(const SovBasis& b) : b_(&b), L_(b.left()), Li_(b.left().inverse()) {
    const int p = b.p(), N = b.n_sites(), D = b.dim();
    eN_ = Vec(D);
    P_ = Vec(D);
    for (int i = 0; i < D; ++i) {
      const Label l = label_from_index(i, p, N);
      const auto e = b.etas(l);
      eN_(i) = e[N - 1];
      cx pr = 1.0;
      for (int a = 0; a < N - 1; ++a) pr *= e[a];
      P_(i) = pr;
    }
  }

  Mat to_label(const Mat& O) const { return L_ * O * Li_; }
  Mat from_label(const Mat& S) const { return Li_ * S * L_; }

  /// Shift T_a^{s}: row l picks column shifted(l, a, s).
  Mat shift(int a, int s) const {
    const int p = b_->p(), N = b_->n_sites(), D = b_->dim();
    Mat T = Mat::Zero(D, D);
    for (int i = 0; i < D; ++i) T(i, label_index(shifted(label_from_index(i, p, N), a, s, p), p)) = 1.0;
    return T;
  }
  const Vec& eta_N() const { return eN_; }
  const Vec& eta_product() const { return P_; }
  const SovBasis& basis() const { return *b_; }

 private:
  const SovBasis* b_;
  Mat L_, Li_;
  Vec eN_, P_;
};

/// Sigma(lambda) = sum_a diag(prod_{c != a} 1/(eta_a/eta_c - eta_c/eta_a) abar(eta_a)/(lambda/eta_a - eta_a/lambda)) T_a^-.
inline Mat sigma_operator(const LabelSpace& ls, cx lam) {
  const SovBasis& b = ls.basis();
  const int p = b.p(), N = b.n_sites(), D = b.dim();
  Mat sig = Mat::Zero(D, D);
  for (int a = 0; a < N - 1; ++a) {
    Vec coef(D);
    for (int i = 0; i < D; ++i) {
      const auto e = b.etas(label_from_index(i, p, N));
      cx c = b.abar(a, e[a]) / (lam / e[a] - e[a] / lam);
      for (int cc = 0; cc < N - 1; ++cc)
        if (cc != a) c /= e[a] / e[cc] - e[cc] / e[a];
      coef(i) = c;
    }
    sig += coef.asDiagonal() * ls.shift(a, -1);
  }
  return sig;
}

/// (B^{-1}A(lambda))^m in label space from the trinomial q-expansion.
inline Mat power_expansion_binvA(const LabelSpace& ls, cx lam, int m) {
  const SovBasis& b = ls.basis();
  const int p = b.p(), N = b.n_sites(), D = b.dim();
  const cx q = b.phase().q;
  const auto as = b.amplitudes().asymptotics();
  const Mat sig = sigma_operator(ls, lam), TNp = ls.shift(N - 1, 1);
  Mat out = Mat::Zero(D, D);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) {
      const int k = m - i - j;
      const double sg = ((j * (N - 1)) % 2 == 0) ? 1.0 : -1.0;
      Vec dg(D);
      for (int r = 0; r < D; ++r)
        dg(r) = sg / std::pow(ls.eta_N()(r), m) * std::pow(lam * ls.eta_product()(r), i - j);
      const cx c = std::pow(as.ap, i) * std::pow(as.am, j) * std::pow(q, 0.5 * (i * (i - 1) - j * (j - 1))) *
                   q_multinomial({i, j, k}, q);
      out += c * dg.asDiagonal() * mat_power(sig, k) * mat_power(TNp, mod(j - i, p));
    }
  return out;
}

/// Sigma(lambda)^k from the multinomial expansion over the separate variables.
inline Mat sigma_power_expansion(const LabelSpace& ls, cx lam, int k) {
  const SovBasis& b = ls.basis();
  const int p = b.p(), N = b.n_sites(), D = b.dim();
  const cx q = b.phase().q;
  auto f = [&](int a, cx x) { return b.abar(a, x) / (lam / x - x / lam); };
  Mat tot = Mat::Zero(D, D);
  std::vector<int> al(N - 1, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == N - 2) {
      al[pos] = left;
      Vec coef(D);
      for (int r = 0; r < D; ++r) {
        const auto e = b.etas(label_from_index(r, p, N));
        cx c = q_multinomial(al, q);
        for (int i = 0; i < N - 1; ++i)
          for (int h = 0; h < al[i]; ++h) {
            c *= f(i, b.phase().qpow(-h) * e[i]);
            for (int j = 0; j < N - 1; ++j)
              if (j != i) c /= std::pow(q, al[j] - h) * e[i] / e[j] - std::pow(q, -al[j] + h) * e[j] / e[i];
          }
        coef(r) = c;
      }
      Mat T = Mat::Identity(D, D);
      for (int i = 0; i < N - 1; ++i) T = T * mat_power(ls.shift(i, -1), al[i]);
      tot += coef.asDiagonal() * T;
      return;
    }
    for (int x = 0; x <= left; ++x) {
      al[pos] = x;
      rec(pos + 1, left - x);
    }
  };
  rec(0, k);
  return tot;
}

/// Elementary operators O_{a,k} and monomials E, cached per basis.
class ElementaryOps {
 public:
  ElementaryOps(const Chain& ch, const SovBasis& b) : ls_(b), b_(&b) {
    const int p = b.p(), N = b.n_sites();
    Z_.clear();
    for (cx e : b.grid().eta0) Z_.push_back(std::pow(e, p));
    const Mat eNfac = ls_.from_label(Mat(ls_.eta_N().array().pow(double(1 - p)).matrix().asDiagonal()));
    for (int a = 0; a < N - 1; ++a) {
      std::vector<Mat> row;
      std::vector<Mat> Bs, As;
      for (int j = 0; j < 2 * p; ++j) {
        Op2 M = ch.monodromy(b.eta(a, j));
        Bs.push_back(M.B);
        As.push_back(M.A);
      }
      cx den = double(p);
      for (int c = 0; c < N - 1; ++c)
        if (c != a) den *= Z_[a] / Z_[c] - Z_[c] / Z_[a];
      for (int k = 0; k < p; ++k) {
        Mat P = Mat::Identity(b.dim(), b.dim());
        for (int j = p + k - 1; j > k; --j) P = P * Bs[j];
        P = P * As[k];
        row.push_back(eNfac * P / den);
      }
      O_.push_back(std::move(row));
    }
  }

  const LabelSpace& label_space() const { return ls_; }
  const std::vector<cx>& Z() const { return Z_; }

  /// O_{a,k}, k taken mod p.
  const Mat& O(int a, int k) const { return O_[a][mod(k, b_->p())]; }

  /// O^{(alpha)}_{a,k} = O_{a,k} O_{a,k-1} ... O_{a,k+1-alpha}.
  Mat O_power(int a, int k, int alpha) const {
    Mat out = Mat::Identity(b_->dim(), b_->dim());
    for (int s = 0; s < alpha; ++s) out = out * O(a, k - s);
    return out;
  }

  struct Item {
    int a, k, alpha;
  };

  /// E = eta_N^{-h} (eta_A^{(+)} T_N^-)^{h0} O^{(alpha_1)}_{a_1,k_1} ... O^{(alpha_r)}_{a_r,k_r}.
  Mat monomial(int h, int h0, const std::vector<Item>& items) const {
    const int N = b_->n_sites();
    const auto as = b_->amplitudes().asymptotics();
    Mat E = ls_.from_label(Mat(ls_.eta_N().array().pow(double(-h)).matrix().asDiagonal()));
    const Vec ea = as.ap * ls_.eta_product();
    const Mat step = ls_.from_label(Mat(ea.asDiagonal()) * ls_.shift(N - 1, -1));
    E = E * mat_power(step, h0);
    for (const Item& it : items) E = E * O_power(it.a, it.k, it.alpha);
    return E;
  }

 private:
  LabelSpace ls_;
  const SovBasis* b_;
  std::vector<cx> Z_;
  std::vector<std::vector<Mat>> O_;
};

/// Worst ||O_{a,k} O_{a,h}|| / (||O_{a,k}|| ||O_{a,h}||) over h != k-1, and the smallest value at h = k-1.
struct ProdZeros {
  double worst_zero = 0.0, smallest_nonzero = 1e300;
};
inline ProdZeros check_prod_zeros(const ElementaryOps& E, int N, int p) {
  ProdZeros r;
  for (int a = 0; a < N - 1; ++a)
    for (int k = 0; k < p; ++k)
      for (int h = 0; h < p; ++h) {
        const double v = (E.O(a, k) * E.O(a, h)).norm() / (E.O(a, k).norm() * E.O(a, h).norm());
        if (mod(h - (k - 1), p) == 0)
          r.smallest_nonzero = std::min(r.smallest_nonzero, v);
        else
          r.worst_zero = std::max(r.worst_zero, v);
      }
  return r;
}

/// O_{a,k} O_{a,k-1} ... O_{a,k-p} against A(Z_a)/prod_{b != a}(Z_a/Z_b - Z_b/Z_a) O_{a,k}.
inline double check_mean_value(const ElementaryOps& E, const Chain& ch, int N, int p) {
  double err = 0.0;
  for (int a = 0; a < N - 1; ++a) {
    cx den = 1.0;
    for (int c = 0; c < N - 1; ++c)
      if (c != a) den *= E.Z()[a] / E.Z()[c] - E.Z()[c] / E.Z()[a];
    const cx coef = ch.average_matrix(E.Z()[a])(0, 0) / den;
    for (int k = 0; k < p; ++k) {
      const Mat lhs = E.O_power(a, k, p + 1);
      const Mat rhs = coef * E.O(a, k);
      err = std::max(err, (lhs - rhs).norm() / rhs.norm());
    }
  }
  return err;
}

/// Exchange relation O_{a,k} O_{b,h} = c O_{b,h} O_{a,k} for a != b with the closed-form coefficient.
inline double check_exchange(const ElementaryOps& E, const SovBasis& b) {
  const int N = b.n_sites(), p = b.p();
  double err = 0.0;
  for (int a = 0; a < N - 1; ++a)
    for (int c = 0; c < N - 1; ++c) {
      if (a == c) continue;
      for (int k = 0; k < p; ++k)
        for (int h = 0; h < p; ++h) {
          const cx e1 = b.eta(a, k - h + 1), e2 = b.eta(a, k - h - 1), e0 = b.eta(c, 0);
          const cx coef = (e1 / e0 - e0 / e1) / (e2 / e0 - e0 / e2);
          const Mat lhs = E.O(a, k) * E.O(c, h), rhs = coef * E.O(c, h) * E.O(a, k);
          err = std::max(err, (lhs - rhs).norm() / std::max(lhs.norm(), rhs.norm()));
        }
    }
  return err;
}

/// Rank of the elementary-monomial family and least-squares residuals for target operators.
struct SpanningReport {
  int count = 0, rank = 0;
  std::vector<double> residuals;
};
inline SpanningReport elementary_spanning(const ElementaryOps& E, const SovBasis& b, const std::vector<Mat>& targets) {
  const int p = b.p(), N = b.n_sites(), D = b.dim();
  std::vector<Mat> fam;
  std::vector<std::vector<ElementaryOps::Item>> idx{{}};
  for (int a = 0; a < N - 1; ++a)
    for (int k = 0; k < p; ++k)
      for (int al = 1; al <= p; ++al) idx.push_back({{a, k, al}});
  for (int h = 0; h < p; ++h)
    for (int h0 = 0; h0 < p; ++h0)
      for (const auto& it : idx) fam.push_back(E.monomial(h, h0, it));
  Mat X(D * D, fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) X.col(i) = Eigen::Map<const Vec>(fam[i].data(), D * D);
  SpanningReport r;
  r.count = int(fam.size());
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  qr.setThreshold(1e-10);
  r.rank = int(qr.rank());
  for (const Mat& t : targets) {
    Vec y = Eigen::Map<const Vec>(t.data(), D * D);
    Vec c = qr.solve(y);
    r.residuals.push_back((X * c - y).norm() / y.norm());
  }
  return r;
}

/// Numerical rank of the 2p x 2p block [[A, B], [C, D]] of L_n(mu) (1-based site).
inline int lax_block_rank(const Chain& ch, int n, cx mu, double tol = 1e-9) {
  const int p = ch.p(), N = ch.n_sites();
  // Local Lax on a single site: restrict by building a one-site chain.
  ModelParams m1{ch.phase(), 1, {ch.site(n)}, 0};
  (void)N;
  Chain one(m1);
  Op2 L = one.lax(1, mu);
  Mat blk(2 * p, 2 * p);
  blk << L.A, L.B, L.C, L.D;
  Eigen::JacobiSVD<Mat> svd(blk);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

}  // namespace sovlat
