/**
 * @file suites.hpp
 * @brief Named verification suites driven by a RunConfig.
 *
 * Seed splitting: every random stream is Rng(sub_seed(config.seed, "<stream>", retry)).
 * Model draws use the stream "model/<mode>" (chP suites use "chp/inhomogeneous",
 * "chp/homogeneous", "chp/self-adjoint"), the B-diagonalisation uses the same
 * name with "/grid" appended, and spectral sample points use "<suite>/points".
 * A rejected draw (see GenericityGate) moves to retry r+1 of the same streams.
 */
#pragma once

#include "sovlat/config.hpp"
#include "sovlat/report.hpp"

#include <chrono>
#include <memory>
#include <optional>

namespace sovlat {

inline constexpr int kMaxGenericRetries = 5;

/// Model, chain and SOV basis that passed the genericity gate.
struct Setup {
  ModelParams model;
  std::optional<ChpSetup> chp;
  Chain chain;
  Amplitudes amps;
  SovBasis basis;
  int retries = 0;
};

namespace detail {
inline ModelParams draw_model(const Phase& ph, int N, ParamMode mode, std::uint64_t seed,
                              std::optional<ChpSetup>& chp) {
  switch (mode) {
    case ParamMode::Generic: return sample_generic(ph, N, seed);
    case ParamMode::SelfAdjoint: return sample_self_adjoint(ph, N, seed);
    case ParamMode::ChpCurve: chp = sample_chp(ph, N, seed, false); return chp->model;
    case ParamMode::HomogeneousChp: chp = sample_self_adjoint_chp(ph, N, seed); return chp->model;
  }
  return sample_generic(ph, N, seed);
}
}  // namespace detail

/// Draws models until the SOV basis passes the gate; throws NonGenericError after kMaxGenericRetries draws.
inline std::unique_ptr<Setup> acquire_setup(const RunConfig& cfg, ParamMode mode, const std::string& stream) {
  const Phase ph = cfg.phase();
  const GenericityGate& gate = cfg.gate;
  std::string last = "no draw attempted";
  for (int r = 0; r < kMaxGenericRetries; ++r) {
    std::optional<ChpSetup> chp;
    ModelParams m = detail::draw_model(ph, cfg.n_sites, mode, sub_seed(cfg.seed, stream, r), chp);
    Chain ch(m);
    Amplitudes am(m);
    Rng grng(sub_seed(cfg.seed, stream + "/grid", r));
    SovGrid g;
    try {
      g = diagonalize_b_family(ch, grng);
    } catch (const NonGenericError& e) {
      last = e.what();
      continue;
    }
    const double zsep = z_separation(g);
    if (zsep < gate.min_z_separation) {
      last = fmt::format("relative Z separation {:.3g} below {:.3g}", zsep, gate.min_z_separation);
      continue;
    }
    SovBasis b(ch, am, g);
    const double cond = condition_number(b.left());
    if (cond > gate.max_condition) {
      last = fmt::format("left SOV basis condition {:.3g} above {:.3g}", cond, gate.max_condition);
      continue;
    }
    return std::unique_ptr<Setup>(new Setup{m, std::move(chp), std::move(ch), std::move(am), std::move(b), r});
  }
  throw NonGenericError(fmt::format("no generic parameters after {} draws of stream '{}' ({})", kMaxGenericRetries,
                                    stream, last));
}

inline std::string model_stream(ParamMode mode) { return "model/" + to_string(mode); }

/// Relative Frobenius residual, 0 when both sides vanish.
inline double rel_diff(const Mat& a, const Mat& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

// ---------------------------------------------------------------- algebra

inline SuiteReport run_algebra(const RunConfig& cfg) {
  SuiteReport rep{"algebra", {}, {}, 0};
  const Phase ph = cfg.phase();
  std::optional<ChpSetup> chp;
  const ModelParams m = detail::draw_model(ph, cfg.n_sites, cfg.mode, sub_seed(cfg.seed, model_stream(cfg.mode)), chp);
  const Chain ch(m);
  Rng rng(sub_seed(cfg.seed, "algebra/points"));
  const cx l1 = rng.annulus(0.7, 1.4), l2 = rng.annulus(0.7, 1.4), l3 = rng.annulus(0.7, 1.4);
  const double tol = cfg.t("algebra");
  const int N = ch.n_sites(), dim = ch.dim();

  rep.add(make_check("yang-baxter", "yang-baxter", yang_baxter_residual(ch, l1, l2), tol));
  rep.add(make_check("tau2-commutativity", "transfer-commute", commutator_residual(ch.tau2(l1), ch.tau2(l2)).relative, tol));
  rep.add(make_check("theta-tau2-commutativity", "theta-charge", commutator_residual(ch.theta(), ch.tau2(l3)).relative, tol));

  const Mat qd = ch.qdet_operator(l1);
  const Mat qd_closed = ch.qdet(l1) * Mat::Identity(dim, dim);
  rep.add(make_check("qdet-closed-form", "quantum-determinant", rel_diff(qd, qd_closed), tol));
  const Op2 M2 = ch.monodromy(l2);
  double central = 0.0;
  for (const Mat* x : {&M2.A, &M2.B, &M2.C, &M2.D}) central = std::max(central, commutator_residual(qd, *x).relative);
  rep.add(make_check("qdet-centrality", "quantum-determinant", central, tol));

  const Op2 P = ch.average_operators(l3);
  const Eigen::Matrix2cd Av = ch.average_matrix(std::pow(l3, ph.p));
  const Mat Id = Mat::Identity(dim, dim);
  double avg = std::max({rel_diff(P.A, Av(0, 0) * Id), rel_diff(P.B, Av(0, 1) * Id), rel_diff(P.C, Av(1, 0) * Id),
                         rel_diff(P.D, Av(1, 1) * Id)});
  rep.add(make_check("average-matrix-factorization", "average-values", avg, tol));

  const Amplitudes am(m);
  const auto as = am.asymptotics();
  const cx small(1e-6, 0.0), large(1e6, 0.0);
  const Mat th = ch.theta(), thi = th.inverse();
  const double a0 = rel_diff(std::pow(small, N) * ch.tau2(small), thi * as.am + th * as.dm);
  const double ai = rel_diff(std::pow(large, -N) * ch.tau2(large), th * as.ap + thi * as.dp);
  rep.add(make_check("tau2-asymptotics", "asymptotics", std::max(a0, ai), tol));

  double qdet_split = 0.0;
  for (cx l : {l1, l2}) qdet_split = std::max(qdet_split, std::abs(am.a(l) * am.d(l / ph.q) - ch.qdet(l)) / std::abs(ch.qdet(l)));
  rep.add(make_check("qdet-amplitude-split", "quantum-determinant", qdet_split, tol));

  // Weyl pair must not commute.
  const Mat u1 = site_op(local_u(ph), 1, N, ph.p), v1 = site_op(local_v(ph), 1, N, ph.p);
  rep.add(make_check("weyl-anti-commutation-sanity", "weyl-pair", commutator_residual(u1, v1).relative, 0.1, true));
  return rep;
}

// ---------------------------------------------------------------- sov

inline SuiteReport run_sov(const RunConfig& cfg) {
  SuiteReport rep{"sov", {}, {}, 0};
  auto st = acquire_setup(cfg, cfg.mode, model_stream(cfg.mode));
  rep.retries = st->retries;
  const Chain& ch = st->chain;
  const SovBasis& b = st->basis;
  Rng rng(sub_seed(cfg.seed, "sov/points"));
  const cx lam = rng.annulus(0.7, 1.4);

  rep.add(make_check("b-polynomial-fit", "b-spectrum", b.grid().fit_error, cfg.t("sov_action")));
  const Mat Bl = ch.monodromy(b.grid().lambda0).B;
  const Mat diag = b.left() * Bl * b.right();
  rep.add(make_check("b-eigenbasis-diagonal", "b-spectrum",
                     (diag - Mat(diag.diagonal().asDiagonal())).norm() / diag.norm(), cfg.t("sov_action")));
  Check zsep = make_check("b-orbit-separation", "b-spectrum", z_separation(b.grid()), cfg.gate.min_z_separation, true);
  rep.add(zsep);
  const char* names[2] = {"A", "D"};
  for (int op = 0; op < 2; ++op) {
    rep.add(make_check(fmt::format("left-{}-action", names[op]), "sov-left-action", left_action_residual(ch, b, op, lam),
                       cfg.t("sov_action")));
    rep.add(make_check(fmt::format("right-{}-action", names[op]), "sov-right-action",
                       right_action_residual(ch, b, op, lam), cfg.t("sov_action")));
  }
  const MeasureComparison mc = sov_measure(b);
  rep.add(make_check("measure-constant-ratio", "sov-measure", mc.ratio_spread, cfg.t("sov_measure")));
  rep.add(make_check("measure-orthogonality", "sov-measure", mc.off_diagonal, cfg.t("sov_measure")));
  const Mat Id = decompose_identity(b);
  rep.add(make_check("identity-decomposition", "sov-identity",
                     (Id - Mat::Identity(b.dim(), b.dim())).norm() / std::sqrt(double(b.dim())), cfg.t("sov_identity")));
  Check cond = make_check("left-basis-condition", "genericity", condition_number(b.left()), cfg.gate.max_condition);
  rep.add(cond);
  return rep;
}

// ---------------------------------------------------------------- spectrum

struct SpectralSetup {
  std::unique_ptr<Setup> setup;
  std::vector<SpectralRecord> records;
};

inline SpectralSetup spectral_setup(const RunConfig& cfg, ParamMode mode, const std::string& stream) {
  SpectralSetup s;
  s.setup = acquire_setup(cfg, mode, stream);
  s.records = assemble_spectrum(s.setup->basis, oracle_eigensystem(s.setup->chain));
  return s;
}

inline SuiteReport run_spectrum(const RunConfig& cfg) {
  SuiteReport rep{"spectrum", {}, {}, 0};
  SpectralSetup ss = spectral_setup(cfg, cfg.mode, model_stream(cfg.mode));
  rep.retries = ss.setup->retries;
  const Chain& ch = ss.setup->chain;
  const SovBasis& b = ss.setup->basis;
  const auto& recs = ss.records;
  Rng rng(sub_seed(cfg.seed, "spectrum/points"));
  std::vector<cx> rand_L;
  for (int i = 0; i < 10; ++i) rand_L.push_back(rng.annulus(0.5, 2.0));

  rep.add(make_check("eigenvalue-count", "spectrum-completeness", std::abs(double(recs.size()) - double(b.dim())), 0.5));
  double er = 0.0, fz = 0.0, fr = 0.0, kd = 1.0, bax = 0.0, ov = 0.0;
  const cx probe = rng.annulus(0.7, 1.4);
  for (const auto& r : recs) {
    er = std::max(er, eigen_residual(ch, r.right, r.t, probe));
    fz = std::max(fz, r.tables.worst_ratio);
    for (cx L : rand_L) fr = std::max(fr, functional_equation_ratio(b, r.t, L));
    kd = std::min(kd, r.tables.smallest_ratio2);
    bax = std::max(bax, baxter_residual(b, r.t, r.tables));
    ov = std::max({ov, 1.0 - overlap(r.right, r.oracle_right), 1.0 - overlap(r.left, r.oracle_left)});
  }
  rep.add(make_check("functional-equation-grid", "functional-equation", fz, cfg.t("functional")));
  rep.add(make_check("functional-equation-random", "functional-equation", fr, cfg.t("functional")));
  rep.add(make_check("kernel-dimension-one", "functional-equation", kd, cfg.t("kernel_dim"), true));
  rep.add(make_check("baxter-equation", "baxter-tq", bax, cfg.t("functional")));

  // Perturbed polynomials: worst sigma ratio over the grid and random points, minimised over eigenvalues.
  double perturbed = 1e300;
  for (const auto& r : recs) {
    EigenvaluePoly tp = r.t;
    double mx = 0.0;
    for (cx c : tp.coef) mx = std::max(mx, std::abs(c));
    tp.coef[tp.coef.size() / 2] += 0.1 * mx;
    double worst = 0.0;
    for (cx e : b.grid().eta0) worst = std::max(worst, functional_equation_ratio(b, tp, std::pow(e, b.p())));
    for (cx L : rand_L) worst = std::max(worst, functional_equation_ratio(b, tp, L));
    perturbed = std::min(perturbed, worst);
  }
  rep.add(make_check("perturbed-eigenvalue-rejected", "functional-equation", perturbed, cfg.t("perturbed"), true));
  rep.add(make_check("eigenvector-residual", "sov-eigenstates", er, cfg.t("functional")));
  rep.add(make_check("oracle-overlap-deficit", "sov-eigenstates", ov, cfg.t("overlap")));
  Check adj = make_check("left-right-adjoint-proportionality", "sov-eigenstates", adjoint_proportionality(recs),
                         cfg.t("overlap"));
  adj.gated = cfg.mode == ParamMode::SelfAdjoint || cfg.mode == ParamMode::HomogeneousChp;
  rep.add(adj);
  return rep;
}

// ---------------------------------------------------------------- scalar products

inline SuiteReport run_scalar(const RunConfig& cfg) {
  SuiteReport rep{"scalar", {}, {}, 0};
  SpectralSetup ss = spectral_setup(cfg, cfg.mode, model_stream(cfg.mode));
  rep.retries = ss.setup->retries;
  const SovBasis& b = ss.setup->basis;
  const auto& recs = ss.records;
  const int p = b.p();
  Rng rng(sub_seed(cfg.seed, "scalar/points"));

  double sep = 0.0, sel_oracle = 0.0, sel_det = 0.0;
  int same = 0;
  for (int i = 0; i < 60; ++i) {
    const int k = rng.integer(p);
    const int kp = (i % 4 == 3) ? mod(k + 1 + rng.integer(p - 1), p) : k;
    SeparateState L = random_separate_state(b, Side::Left, k, rng);
    SeparateState R = random_separate_state(b, Side::Right, kp, rng);
    const Vec l = make_separate_state(b, L), r = make_separate_state(b, R);
    const cx direct = l.transpose() * r;
    const cx det = pairing_determinant(b, L, R);
    if (k == kp) {
      ++same;
      sep = std::max(sep, std::abs(det - direct) / std::abs(direct));
    } else {
      sel_det = std::max(sel_det, std::abs(det));
      sel_oracle = std::max(sel_oracle, std::abs(direct) / (l.norm() * r.norm()));
    }
  }
  rep.add(make_check(fmt::format("separate-pairs-determinant-{}", same), "scalar-determinant", sep, cfg.t("scalar")));

  double eig = 0.0, wit = 0.0;
  for (const auto& x : recs)
    for (const auto& y : recs) {
      SeparateState L{Side::Left, x.k(), x.tables.Qbar}, R{Side::Right, y.k(), y.tables.Q};
      const cx det = pairing_determinant(b, L, R);
      const cx direct = (x.left * y.right)(0, 0);
      if (x.k() == y.k()) {
        const double scale = std::sqrt(std::abs(eigen_norm(b, x) * eigen_norm(b, y)));
        eig = std::max(eig, std::abs(det - direct) / scale);
        if (&x != &y) wit = std::max(wit, witness_residual(b, x, y));
      } else {
        sel_det = std::max(sel_det, std::abs(det));
        sel_oracle = std::max(sel_oracle, std::abs(direct) / (x.left.norm() * y.right.norm()));
      }
    }
  rep.add(make_check("eigenstate-pairs-determinant", "scalar-determinant", eig, cfg.t("scalar")));
  rep.add(make_check("charge-selection-determinant-exact", "charge-selection", sel_det, 1e-300));
  rep.add(make_check("charge-selection-oracle", "charge-selection", sel_oracle, cfg.t("selection")));
  rep.add(make_check("orthogonality-witness", "zero-eigenvector", wit, cfg.t("witness")));
  const Mat S = eigen_identity_decomposition(b, recs);
  rep.add(make_check("eigenstate-identity-decomposition", "sov-identity",
                     (S - Mat::Identity(b.dim(), b.dim())).norm() / std::sqrt(double(b.dim())), cfg.t("sov_identity")));
  return rep;
}

// ---------------------------------------------------------------- chiral Potts

inline SuiteReport run_chp(const RunConfig& cfg) {
  SuiteReport rep{"chp", {}, {}, 0};
  const Phase ph = cfg.phase();
  const int N = cfg.n_sites;
  ChpSetup inh = sample_chp(ph, N, sub_seed(cfg.seed, "chp/inhomogeneous"), false);
  ChpSetup hom = sample_chp(ph, N, sub_seed(cfg.seed, "chp/homogeneous"), true);
  Rng rng(sub_seed(cfg.seed, "chp/points"));
  const cx lam = rng.annulus(0.7, 1.4);

  double curve = 0.0, rec = 0.0, cyc = 0.0;
  std::vector<CurvePoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(inh.random_point());
  for (const auto* v : {&inh.qs, &inh.rs, &pts})
    for (const CurvePoint& P : *v) curve = std::max(curve, P.curve_residual(ph.p));
  for (const CurvePoint& P : pts)
    for (const CurvePoint& Q : inh.qs) {
      rec = std::max(rec, w_recursion_residual(ph, Q, P));
      cyc = std::max(cyc, w_cyclicity_residual(ph, Q, P));
    }
  rep.add(make_check("curve-points", "chp-curve", curve, cfg.t("curve")));
  rep.add(make_check("weight-recursion", "chp-weights", rec, cfg.t("weights")));
  rep.add(make_check("weight-cyclicity", "chp-weights", cyc, cfg.t("weights")));

  {
    const Chain ch(hom.model);
    const CurvePoint P1 = hom.random_point(), P2 = hom.random_point();
    const Mat T1 = chp_T(ph, P1, hom.qs, hom.rs), T2 = chp_T(ph, P2, hom.qs, hom.rs);
    rep.add(make_check("homogeneous-T-tau2", "chp-commute", commutator_residual(T1, ch.tau2(lam)).relative, cfg.t("chp_commute")));
    rep.add(make_check("homogeneous-T-T", "chp-commute", commutator_residual(T1, T2).relative, cfg.t("chp_commute")));
    rep.add(make_check("homogeneous-theta-T", "chp-commute", commutator_residual(ch.theta(), T1).relative, cfg.t("chp_commute")));
    const Amplitudes am(hom.model);
    const QOperatorFit fit = verify_q_operator_property(ch, am, hom, P1);
    rep.add(make_check("q-operator-held-out", "baxter-q-operator", fit.held_out_residual, cfg.t("q_operator")));
    rep.add(make_check("q-operator-average", "baxter-q-operator", fit.average_residual, cfg.t("q_operator")));
  }
  {
    const Chain ch(inh.model);
    const CurvePoint P1 = inh.random_point(), P2 = inh.random_point();
    const Mat T1 = chp_T(ph, P1, inh.qs, inh.rs), T2 = chp_T(ph, P2, inh.qs, inh.rs);
    const Mat H1 = chp_T_hat(ph, P1, inh.qs, inh.rs), H2 = chp_T_hat(ph, P2, inh.qs, inh.rs);
    rep.add(make_check("inhomogeneous-TThat-tau2", "chp-commute", commutator_residual(T1 * H2, ch.tau2(lam)).relative,
                       cfg.t("chp_commute")));
    rep.add(make_check("inhomogeneous-TThat-exchange", "chp-commute", proportionality_residual(T1 * H2, T2 * H1), cfg.t("chp_commute")));
    Check single = make_check("inhomogeneous-single-T-tau2", "chp-commute",
                              commutator_residual(T1, ch.tau2(lam)).relative, cfg.t("chp_commute"));
    single.gated = false;
    rep.add(single);
    double prop = 0.0;
    for (int m = 1; m <= N; ++m)
      prop = std::max(prop, propagator_residual(ch, propagator_inverse(ph, inh.qs, inh.rs, m), m, lam));
    rep.add(make_check("propagator-relation", "propagator", prop, cfg.t("propagator")));
    rep.add(make_check("s-operator-intertwining", "lls-sll",
                       s_intertwining_residual(ph, inh.qs[0], inh.rs[0], P1, P2, inh.c0, lam), cfg.t("intertwining")));
  }
  {
    ChpSetup sa = sample_self_adjoint_chp(ph, N, sub_seed(cfg.seed, "chp/self-adjoint"));
    const Chain ch(sa.model);
    const Mat t = ch.tau2(cx(rng.uniform(0.7, 1.4), 0.0));
    rep.add(make_check("self-adjoint-tau2-hermitian", "self-adjoint", rel_diff(t, t.adjoint()), cfg.t("hermiticity")));
  }
  return rep;
}

// ---------------------------------------------------------------- inverse problem

inline SuiteReport run_inverse(const RunConfig& cfg) {
  SuiteReport rep{"inverse", {}, {}, 0};
  const Phase ph = cfg.phase();
  const int p = ph.p, N = cfg.n_sites;
  auto st = acquire_setup(cfg, cfg.mode, model_stream(cfg.mode));
  rep.retries = st->retries;
  const Chain& ch = st->chain;
  const Amplitudes& am = st->amps;
  const SovBasis& b = st->basis;
  const double tr = cfg.t("reconstruction"), tl = cfg.t("lemma");

  auto site_checks = [&](const ReconstructionContext& c, int n, const std::string& tag) {
    const Mat u = local_u_inverse(*c.chain, n), a0 = direct_alpha0(*c.chain, *c.amps, n);
    const TwoForms ur = reconstruct_u_inverse(c, n), ar = reconstruct_alpha0(c, n);
    rep.add(make_check(fmt::format("{}u-inverse-site{}", tag, n), "inverse-u",
                       std::max(rel_diff(ur.first, u), rel_diff(ur.second, u)), tr));
    rep.add(make_check(fmt::format("{}alpha0-site{}", tag, n), "inverse-alpha0",
                       std::max(rel_diff(ar.first, a0), rel_diff(ar.second, a0)), tr));
    const cx rho = rho_constant(*c.amps, n);
    if (std::abs(rho - 1.0 / rho) < 1e-8) {
      // mu_- = +-mu_+ (e.g. homogeneous self-adjoint chiral Potts): the v^{2k} formula has no content.
      Check skip = make_check(fmt::format("{}v-powers-site{}-degenerate-prefactor", tag, n), "inverse-v",
                              std::abs(rho - 1.0 / rho), 1e-8, true);
      skip.gated = false;
      rep.add(skip);
      return;
    }
    const auto betas = beta_operators(c, n);
    double ve = 0.0, vo = 0.0;
    for (int k = 1; k < p; ++k) {
      const Mat t = site_op(mat_power(local_v(ph), 2 * k), n, N, p);
      ve = std::max(ve, rel_diff(reconstruct_v_even_power(c, betas, n, k), t));
    }
    for (int k = 1; k <= p; ++k) {
      const Mat t = site_op(mat_power(local_v(ph), k), n, N, p);
      vo = std::max(vo, rel_diff(reconstruct_v_power(c, betas, n, k), t));
    }
    rep.add(make_check(fmt::format("{}v-even-powers-site{}", tag, n), "inverse-v", ve, tr));
    rep.add(make_check(fmt::format("{}v-all-powers-site{}", tag, n), "inverse-v", vo, tr));
    rep.add(make_check(fmt::format("{}beta-sum-rule-site{}", tag, n), "inverse-v", beta_sum_rule_residual(c, betas, n), tr));
  };

  site_checks(make_context(ch, am), 1, "");
  const cx rho1 = rho_constant(am, 1);
  if (std::abs(rho1 - 1.0 / rho1) >= 1e-8)
    rep.add(make_check("beta-expansion-lemma", "inverse-v", beta_expansion_residual(ch, am), tl));

  {
    ChpSetup cs = sample_chp(ph, N, sub_seed(cfg.seed, "chp/inhomogeneous"), false);
    const Chain cch(cs.model);
    const Amplitudes cam(cs.model);
    std::vector<Mat> ui;
    for (int n = 1; n <= N; ++n) ui.push_back(propagator_inverse(ph, cs.qs, cs.rs, n));
    const ReconstructionContext c = make_context(cch, cam, ui);
    for (int n = 1; n <= N; ++n) site_checks(c, n, "chp-");
  }

  Rng rng(sub_seed(cfg.seed, "inverse/points"));
  const cx lam = rng.annulus(0.7, 1.4);
  const LabelSpace ls(b);
  const Op2 M = ch.monodromy(lam);
  const Mat BA = M.B.partialPivLu().solve(M.A);
  const Mat Pp = mat_power(BA, p);
  const auto av = ch.average_matrix(std::pow(lam, p));
  rep.add(make_check("binvA-power-p-scalar", "binvA-power", rel_diff(Pp, av(0, 0) / av(0, 1) * Mat::Identity(b.dim(), b.dim())), tl));
  const Mat SBA = ls.to_label(BA);
  double pw = 0.0;
  for (int m = 2; m <= p; ++m) pw = std::max(pw, rel_diff(power_expansion_binvA(ls, lam, m), mat_power(SBA, m)));
  rep.add(make_check("binvA-power-expansion", "binvA-power", pw, tl));
  const Mat sig = sigma_operator(ls, lam);
  double sg = 0.0;
  for (int k = 1; k <= p; ++k) sg = std::max(sg, rel_diff(sigma_power_expansion(ls, lam, k), mat_power(sig, k)));
  rep.add(make_check("sigma-multinomial-expansion", "q-multinomial", sg, tl));
  const QMultinomialCheck qm = q_multinomial_enumeration(ph);
  rep.add(make_check(fmt::format("q-multinomial-enumeration-{}", qm.compositions), "q-multinomial", qm.enumeration, tl));
  rep.add(make_check("q-multinomial-vanishing", "q-multinomial", qm.vanishing, tl));

  const ElementaryOps E(ch, b);
  const ProdZeros pz = check_prod_zeros(E, N, p);
  rep.add(make_check("elementary-product-zeros", "elementary-ops", pz.worst_zero, tl));
  rep.add(make_check("elementary-product-nonzero", "elementary-ops", pz.smallest_nonzero, 1e-3, true));
  rep.add(make_check("elementary-mean-value", "elementary-ops", check_mean_value(E, ch, N, p), tr));
  if (N > 2) rep.add(make_check("elementary-exchange", "elementary-ops", check_exchange(E, b), tr));
  if (N == 2) {
    std::vector<Mat> targets;
    for (int n = 1; n <= N; ++n)
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          targets.push_back(site_op(mat_power(local_u(ph), i) * mat_power(local_v(ph), j), n, N, p));
    const SpanningReport sr = elementary_spanning(E, b, targets);
    rep.add(make_check(fmt::format("elementary-basis-rank-{}-of-{}", sr.rank, sr.count), "elementary-span",
                       std::abs(double(sr.rank) - double(b.dim()) * b.dim()), 0.5));
    double worst = 0.0;
    for (double r : sr.residuals) worst = std::max(worst, r);
    rep.add(make_check("elementary-span-local-operators", "elementary-span", worst, cfg.t("spanning")));
  }
  int rank_dev = 0;
  for (int n = 1; n <= N; ++n)
    rank_dev = std::max({rank_dev, std::abs(lax_block_rank(ch, n, am.mu_plus()[n - 1]) - p),
                         std::abs(lax_block_rank(ch, n, am.mu_minus()[n - 1]) - p)});
  rep.add(make_check("lax-block-rank-at-qdet-zeros", "qdet-zeros", double(rank_dev), 0.5));
  return rep;
}

// ---------------------------------------------------------------- form factors

namespace detail {
inline double worst_selected(const std::vector<FormFactorResult>& v) {
  double w = 0.0;
  for (const auto& r : v)
    if (r.selected) w = std::max(w, r.rel_err);
  return w;
}
/// Largest |oracle| / scale over unselected entries; infinite if the determinant side is not exactly zero.
inline double worst_unselected(const std::vector<FormFactorResult>& v) {
  double w = 0.0;
  for (const auto& r : v)
    if (!r.selected) {
      if (r.det_value != cx(0.0)) return std::numeric_limits<double>::infinity();
      w = std::max(w, r.rel_err);
    }
  return w;
}
}  // namespace detail

/// Hamiltonian and order-parameter checks on a homogeneous self-adjoint chiral Potts chain.
inline SuiteReport run_hamiltonian(const RunConfig& cfg) {
  SuiteReport rep{"hamiltonian", {}, {}, 0};
  auto st = acquire_setup(cfg, ParamMode::HomogeneousChp, "chp/self-adjoint");
  rep.retries = st->retries;
  const Phase ph = cfg.phase();
  const Chain& ch = st->chain;
  ChpSetup& chp = *st->chp;
  const VgrHamiltonian H = build_vgr_hamiltonian(ph, cfg.n_sites, chp.qs[0]);
  const CurvePoint P = chp.random_point();
  const Mat T = chp_T(ph, P, chp.qs, chp.rs);
  rep.add(make_check("hamiltonian-T-commute", "vgr-hamiltonian", commutator_residual(H.H, T).relative, cfg.t("hamiltonian")));
  rep.add(make_check("hamiltonian-theta-commute", "vgr-hamiltonian", commutator_residual(H.H, ch.theta()).relative,
                     cfg.t("hamiltonian")));
  const double herm = rel_diff(H.H, H.H.adjoint());
  rep.add(make_check("hamiltonian-hermiticity-gate", "vgr-hamiltonian", herm, cfg.t("hermiticity")));
  rep.add(make_check("hamiltonian-angle-relation", "vgr-hamiltonian",
                     std::abs(H.cos_theta_bar * chp.qs[0].kp - H.cos_theta), cfg.t("hamiltonian")));
  if (herm < cfg.t("hermiticity")) {
    const auto recs = assemble_spectrum(st->basis, oracle_eigensystem(ch));
    const auto rows = order_parameter_table(ch, st->amps, st->basis, recs, H.H);
    double err = 0.0, mag = 0.0;
    for (const auto& r : rows) {
      err = std::max(err, r.rel_err);
      mag = std::max(mag, r.magnitude);
    }
    rep.add(make_check("order-parameter-determinant", "order-parameter", err, cfg.t("order_parameter")));
    rep.add(make_check("order-parameter-bounded", "order-parameter", mag, 1.0 + 1e-9));
  }
  return rep;
}

inline SuiteReport run_formfactor(const RunConfig& cfg) {
  SuiteReport rep{"formfactor", {}, {}, 0};
  const Phase ph = cfg.phase();
  const int p = ph.p, N = cfg.n_sites;
  const double tol = (p == 3 && N == 2) ? cfg.t("form_factor") : cfg.t("form_factor_spot");
  SpectralSetup ss = spectral_setup(cfg, cfg.mode, model_stream(cfg.mode));
  rep.retries = ss.setup->retries;
  const Chain& ch = ss.setup->chain;
  const Amplitudes& am = ss.setup->amps;
  const SovBasis& b = ss.setup->basis;
  const auto& recs = ss.records;

  FormFactorContext c{&ch, &am, &b, &recs, Mat::Identity(b.dim(), b.dim()), 1};
  auto add_table = [&](const std::vector<FormFactorResult>& v, const std::string& name, const std::string& anchor) {
    rep.add(make_check(name, anchor, detail::worst_selected(v), tol));
    rep.add(make_check(name + "-zero-pattern", "charge-selection", detail::worst_unselected(v), cfg.t("selection")));
    rep.form_factors.insert(rep.form_factors.end(), v.begin(), v.end());
  };
  add_table(ff_u_inverse(c), "u-inverse-site1", "form-factor-u");
  add_table(ff_alpha0_inverse(c), "alpha0-inverse-site1", "form-factor-alpha0");

  Rng rng(sub_seed(cfg.seed, "formfactor/points"));
  double lam_err = 0.0;
  for (int i = 0; i < 2; ++i) lam_err = std::max(lam_err, u_matrix_lambda_check(ch, b, recs, rng.annulus(0.7, 1.4)));
  rep.add(make_check("binvA-determinant-lambda-independence", "form-factor-u", lam_err, tol));

  const ElementaryOps E(ch, b);
  const std::vector<std::pair<std::string, std::vector<ElementaryOps::Item>>> shapes = {
      {"E[h=1,h0=1]", {}}, {"E[h=0,h0=0,O(1,1)]", {{0, 1, 1}}}, {fmt::format("E[h=2,h0=1,O^({})(1,0)]", p - 1), {{0, 0, p - 1}}}};
  const int hs[3][2] = {{1, 1}, {0, 0}, {2, 1}};
  for (std::size_t i = 0; i < shapes.size(); ++i)
    add_table(ff_elementary(E, b, recs, hs[i][0], hs[i][1], shapes[i].second, shapes[i].first),
              "elementary-" + shapes[i].first, "form-factor-elementary");
  if (N > 2) add_table(ff_elementary(E, b, recs, 0, 1, {{0, 1, 1}, {1, 2, 1}}, "E[h=0,h0=1,O(1,1)O(2,2)]"),
                       "elementary-two-orbits", "form-factor-elementary");

  Rng rrng(sub_seed(cfg.seed, "formfactor/rescale"));
  const InvarianceReport inv = normalization_invariance(ch, am, b, E, recs, rrng);
  rep.add(make_check(fmt::format("normalization-invariance-rescaled-{}", inv.pairs), "normalization-invariance",
                     inv.rescale_change, cfg.t("invariance")));
  rep.add(make_check("normalization-invariance-oracle", "normalization-invariance", inv.oracle_error, tol));

  // Sites n > 1 need the chiral Potts propagator.
  if (N > 1) {
    auto cst = acquire_setup(cfg, ParamMode::ChpCurve, "chp/inhomogeneous");
    rep.retries = std::max(rep.retries, cst->retries);
    const auto crecs = assemble_spectrum(cst->basis, oracle_eigensystem(cst->chain));
    const ChpSetup& cs = *cst->chp;
    double wu = 0.0, wa = 0.0;
    for (int n = 2; n <= N; ++n) {
      FormFactorContext cn{&cst->chain, &cst->amps, &cst->basis, &crecs, propagator_inverse(ph, cs.qs, cs.rs, n), n};
      wu = std::max(wu, detail::worst_selected(ff_u_inverse(cn)));
      wa = std::max(wa, detail::worst_selected(ff_alpha0_inverse(cn)));
    }
    rep.add(make_check("chp-u-inverse-sites-2-to-N", "form-factor-u", wu, cfg.t("form_factor_spot")));
    rep.add(make_check("chp-alpha0-inverse-sites-2-to-N", "form-factor-alpha0", wa, cfg.t("form_factor_spot")));
  }

  rep.append(run_hamiltonian(cfg));
  rep.suite = "formfactor";
  return rep;
}

// ---------------------------------------------------------------- dispatch

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"algebra", "sov", "spectrum", "scalar", "chp", "inverse", "formfactor"};
  return names;
}

inline SuiteReport run_suite(const RunConfig& cfg, const std::string& name) {
  if (name == "algebra") return run_algebra(cfg);
  if (name == "sov") return run_sov(cfg);
  if (name == "spectrum") return run_spectrum(cfg);
  if (name == "scalar") return run_scalar(cfg);
  if (name == "chp") return run_chp(cfg);
  if (name == "inverse") return run_inverse(cfg);
  if (name == "formfactor") return run_formfactor(cfg);
  if (name == "all") {
    SuiteReport all{"all", {}, {}, 0};
    for (const auto& n : suite_names()) all.append(run_suite(cfg, n));
    return all;
  }
  throw ConfigError("unknown suite '" + name + "'");
}

}  // namespace sovlat
