/**
 * @file unit_tests.cpp
 * @brief Module tests. Expected values come from brute-force oracles built in the test itself,
 * from exact algebraic identities, or from trivially known values.
 */
#include "sovlat/suites.hpp"

#include <gtest/gtest.h>

#include <set>

namespace sovlat {
namespace {

RunConfig config(int p, int N, ParamMode mode = ParamMode::Generic, std::uint64_t seed = 42) {
  RunConfig c;
  c.p = p;
  c.n_sites = N;
  c.mode = mode;
  c.seed = seed;
  return c;
}

/// Cached generic setups with their assembled spectra.
struct Fixture {
  std::unique_ptr<Setup> st;
  std::vector<SpectralRecord> recs;
  const Chain& ch() const { return st->chain; }
  const Amplitudes& am() const { return st->amps; }
  const SovBasis& b() const { return st->basis; }
};

const Fixture& generic(int p, int N) {
  static std::map<std::pair<int, int>, Fixture> cache;
  auto it = cache.find({p, N});
  if (it == cache.end()) {
    Fixture f;
    f.st = acquire_setup(config(p, N), ParamMode::Generic, "model/generic");
    f.recs = assemble_spectrum(f.st->basis, oracle_eigensystem(f.st->chain));
    it = cache.emplace(std::make_pair(p, N), std::move(f)).first;
  }
  return it->second;
}

double rel(const Mat& a, const Mat& b) { return rel_diff(a, b); }

// ================================================================ algebra_core

TEST(AlgebraCore, WeylPairOnBasisStates) {
  const Phase ph = Phase::make(3, 2);
  const Mat v = local_v(ph), u = local_u(ph);
  Vec e1 = Vec::Zero(3);
  e1(1) = 1.0;
  EXPECT_LT((v * e1 - ph.q * e1).norm(), 1e-15);
  EXPECT_LT((mat_power(u, 3) - Mat::Identity(3, 3)).norm(), 1e-14);
  EXPECT_LT((mat_power(v, 3) - Mat::Identity(3, 3)).norm(), 1e-14);
  const Phase p5 = Phase::make(5, 2);
  const Mat u5 = local_u(p5), v5 = local_v(p5);
  EXPECT_LT((u5 * v5 - p5.q * v5 * u5).norm(), 1e-14);
}

TEST(AlgebraCore, LaxDiagonalActionOnVEigenstates) {
  const Phase ph = Phase::make(3, 2);
  const ModelParams m = sample_generic(ph, 1, 7);
  const Chain one(m);
  const cx lam(0.8, 0.4);
  const Op2 L = one.lax(1, lam);
  const SiteParams& s = m.sites[0];
  for (int k = 0; k < 3; ++k) {
    Vec ek = Vec::Zero(3);
    ek(k) = 1.0;
    const cx expect = lam * s.alpha * ph.qpow(k) - s.beta * ph.qpow(-k) / lam;
    EXPECT_LT((L.A * ek - expect * ek).norm(), 1e-14);
  }
}

TEST(AlgebraCore, LaxBlockRankAtQuantumDeterminantZeros) {
  const Fixture& f = generic(3, 2);
  for (int n = 1; n <= 2; ++n) {
    EXPECT_EQ(lax_block_rank(f.ch(), n, f.am().mu_plus()[n - 1]), 3);
    EXPECT_EQ(lax_block_rank(f.ch(), n, f.am().mu_minus()[n - 1]), 3);
    EXPECT_EQ(lax_block_rank(f.ch(), n, cx(0.91, 0.2)), 6);
  }
}

TEST(AlgebraCore, TransferMatricesCommute) {
  for (auto [p, N] : {std::pair{3, 2}, std::pair{3, 3}, std::pair{5, 2}}) {
    const Fixture& f = generic(p, N);
    const Mat t1 = f.ch().tau2(cx(0.7, 0.3)), t2 = f.ch().tau2(cx(-1.1, 0.5));
    EXPECT_LT((t1 * t2 - t2 * t1).norm(), 1e-10 * t1.norm() * t2.norm());
    EXPECT_LT(yang_baxter_residual(f.ch(), cx(0.8, 0.3), cx(1.2, -0.4)), 1e-12);
  }
}

TEST(AlgebraCore, ThetaChargeRelations) {
  const Fixture& f = generic(3, 2);
  const Op2 M = f.ch().monodromy(cx(0.9, 0.3));
  const Mat& th = f.ch().theta();
  EXPECT_LT(commutator_residual(th, M.A + M.D).relative, 1e-14);
  EXPECT_LT((th * M.C - f.ch().phase().q * M.C * th).norm() / M.C.norm(), 1e-13);
}

TEST(AlgebraCore, SmallLambdaAsymptotics) {
  // Leading term of the Lax product: A carries prod(-beta v^{-1}), D carries prod(gamma v).
  const Fixture& f = generic(3, 2);
  const cx l(1e-4, 0.0);
  const auto as = f.am().asymptotics();
  const Mat& th = f.ch().theta();
  const Mat lim = th.inverse() * as.am + th * as.dm;
  EXPECT_LT(rel(std::pow(l, 2) * f.ch().tau2(l), lim), 1e-6);
}

TEST(AlgebraCore, QuantumDeterminant) {
  const Fixture& f = generic(3, 2);
  const cx l(0.83, -0.41);
  const Mat op = f.ch().qdet_operator(l);
  const Mat id = Mat::Identity(9, 9);
  EXPECT_LT(rel(op, f.ch().qdet(l) * id), 1e-9);
  EXPECT_LT(std::abs(f.ch().qdet(f.am().mu_plus()[0])), 1e-12);
  EXPECT_LT(std::abs(f.ch().qdet(f.am().mu_minus()[1])), 1e-12);
  EXPECT_LT(commutator_residual(op, f.ch().monodromy(cx(1.2, 0.1)).B).relative, 1e-12);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const cx x = rng.annulus();
    EXPECT_LT(std::abs(f.am().a(x) * f.am().d(x / f.ch().phase().q) - f.ch().qdet(x)) / std::abs(f.ch().qdet(x)), 1e-9);
  }
}

TEST(AlgebraCore, AverageValues) {
  const Fixture& f = generic(3, 2);
  const Phase& ph = f.ch().phase();
  const cx l(0.77, 0.52);
  const Op2 P = f.ch().average_operators(l), Pq = f.ch().average_operators(ph.q * l);
  const Eigen::Matrix2cd Av = f.ch().average_matrix(std::pow(l, 3));
  const Mat id = Mat::Identity(9, 9);
  EXPECT_LT(rel(P.A, Av(0, 0) * id), 1e-8);
  EXPECT_LT(rel(P.D, Av(1, 1) * id), 1e-8);
  EXPECT_LT(rel(P.B, Av(0, 1) * id), 1e-8);
  EXPECT_LT(rel(P.A, Pq.A), 1e-12);
  // Orbit products of the gauged amplitudes add up to the average trace.
  const cx al = f.am().orbit_constant_eps(l, 1);
  cx pa = 1.0, pd = 1.0;
  for (int n = 1; n <= 3; ++n) {
    pa *= al * f.am().a(ph.qpow(n) * l);
    pd *= f.am().d(ph.qpow(n) * l) / al;
  }
  EXPECT_LT(std::abs(pa + pd - Av.trace()) / std::abs(Av.trace()), 1e-10);
}

// ================================================================ oracle

TEST(Oracle, DirectMatrixElements) {
  const Fixture& f = generic(3, 2);
  Vec x = Vec::Random(9);
  RowVec y = RowVec::Random(9);
  EXPECT_LT(std::abs(direct_matrix_element(y, Mat::Identity(9, 9), x) - (y * x)(0, 0)), 1e-14);
  const Mat u1 = site_op(local_u(f.ch().phase()), 1, 2, 3);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const cx e = direct_matrix_element(RowVec::Unit(9, i), u1, Vec::Unit(9, j));
      EXPECT_TRUE(e == cx(0.0) || e == cx(1.0));
    }
  const auto& r = f.recs[0];
  const cx lam(1.3, 0.2);
  const cx v = direct_matrix_element(r.oracle_right.adjoint(), f.ch().tau2(lam), r.oracle_right);
  EXPECT_LT(std::abs(v - r.t(lam) * r.oracle_right.squaredNorm()) / std::abs(v), 1e-10);
  EXPECT_THROW(direct_matrix_element(RowVec::Zero(3), Mat::Identity(9, 9), x), std::invalid_argument);
}

TEST(Oracle, KernelVector) {
  Mat m(2, 2);
  m << 1.0, 1.0, 1.0, 1.0;
  const Kernel k = kernel_vector(m);
  EXPECT_LT(k.ratio, 1e-15);
  EXPECT_LT(std::abs(k.vector(0) + k.vector(1)), 1e-14);
  EXPECT_NEAR(kernel_vector(Mat::Identity(4, 4)).ratio, 1.0, 1e-15);
}

TEST(Oracle, CommutatorResidual) {
  const Phase ph = Phase::make(3, 2);
  const Mat u = local_u(ph), v = local_v(ph);
  EXPECT_EQ(commutator_residual(u, u).relative, 0.0);
  EXPECT_FALSE(commutator_residual(u, v, 1e-10).pass);
}

// ================================================================ sov_basis

TEST(SovBasis, SimpleSpectrumAndFit) {
  const Fixture& f = generic(3, 2);
  const SovBasis& b = f.b();
  const Mat B0 = f.ch().monodromy(b.grid().lambda0).B;
  const Vec w = (b.left() * B0 * b.right()).diagonal();
  std::set<std::pair<long, long>> distinct;
  for (int i = 0; i < 9; ++i) distinct.insert({std::lround(w(i).real() * 1e6), std::lround(w(i).imag() * 1e6)});
  EXPECT_EQ(distinct.size(), 9u);
  // Fitted eigenvalue function against B at a fresh point.
  const cx l1(0.64, -0.93);
  const Mat D = b.left() * f.ch().monodromy(l1).B * b.right();
  for (int i = 0; i < 9; ++i) {
    const cx bv = b.b_value(label_from_index(i, 3, 2), l1);
    EXPECT_LT(std::abs(D(i, i) - bv) / std::abs(bv), 1e-8);
  }
  EXPECT_LT(std::abs(b.eta(0, 1) / b.eta(0, 0) - f.ch().phase().q), 1e-12);
}

TEST(SovBasis, AmplitudeConditions) {
  const Fixture& f = generic(3, 3);
  const SovBasis& b = f.b();
  const Phase& ph = f.ch().phase();
  for (int a = 0; a < 2; ++a)
    for (int h = 0; h < 3; ++h) {
      const cx e = b.eta(a, h);
      EXPECT_LT(std::abs(b.abar(a, e) * b.dbar(a, e / ph.q) - f.ch().qdet(e)) / std::abs(f.ch().qdet(e)), 1e-10);
      cx pr = 1.0;
      for (int k = 1; k <= 3; ++k) pr *= b.abar(a, ph.qpow(k) * e);
      const cx A = f.ch().average_matrix(std::pow(e, 3))(0, 0);
      EXPECT_LT(std::abs(pr - A) / std::abs(A), 1e-10);
    }
}

TEST(SovBasis, ActionsMeasureIdentity) {
  for (auto [p, N] : {std::pair{3, 2}, std::pair{3, 3}}) {
    const Fixture& f = generic(p, N);
    const SovBasis& b = f.b();
    for (int op = 0; op < 2; ++op) {
      EXPECT_LT(left_action_residual(f.ch(), b, op, cx(0.93, 0.41)), 1e-8);
      EXPECT_LT(right_action_residual(f.ch(), b, op, cx(0.93, 0.41)), 1e-8);
    }
    EXPECT_LT(sov_measure(b).ratio_spread, 1e-8);
    const Mat S = decompose_identity(b);
    EXPECT_LT((S - Mat::Identity(b.dim(), b.dim())).norm(), N == 2 ? 1e-8 : 1e-7);
    const Vec x = Vec::Random(b.dim());
    EXPECT_LT((S * x - x).norm() / x.norm(), 1e-8);
  }
  EXPECT_EQ(generic(3, 2).b().vandermonde(Label{1, 0}), cx(1.0));
}

// ================================================================ spectrum

TEST(Spectrum, OracleEigensystem) {
  const Fixture& f = generic(3, 2);
  ASSERT_EQ(f.recs.size(), 9u);
  std::vector<int> sector(3, 0);
  for (const auto& r : f.recs) {
    ++sector[r.k()];
    EXPECT_LT((f.ch().theta() * r.oracle_right - f.ch().phase().qpow(r.k()) * r.oracle_right).norm(), 1e-10);
    EXPECT_LT(eigen_residual(f.ch(), r.oracle_right, r.t, cx(1.17, -0.35)), 1e-9);
  }
  EXPECT_EQ(sector, (std::vector<int>{3, 3, 3}));
}

TEST(Spectrum, EigenvaluePolynomialConsistency) {
  const Fixture& f = generic(3, 2);
  const auto& r = f.recs[4];
  const auto pts = t_sample_points(2, 0.37);
  std::vector<cx> vals;
  for (cx l : pts) vals.push_back((r.oracle_right.adjoint() * f.ch().tau2(l) * r.oracle_right)(0, 0) /
                                  r.oracle_right.squaredNorm());
  const EigenvaluePoly refit = fit_eigenvalue_poly(pts, vals, 2, r.k());
  for (std::size_t i = 0; i < r.t.coef.size(); ++i) EXPECT_LT(std::abs(refit.coef[i] - r.t.coef[i]), 1e-9);
  const cx l(0.6, 0.8);
  EXPECT_LT(std::abs(r.t(l) - r.t(-l)), 1e-10 * std::abs(r.t(l)));
}

TEST(Spectrum, FunctionalEquation) {
  const Fixture& f = generic(3, 2);
  const SovBasis& b = f.b();
  Rng rng(9);
  std::vector<cx> Ls;
  for (int i = 0; i < 5; ++i) Ls.push_back(rng.annulus());
  for (const auto& r : f.recs) {
    EXPECT_LT(functional_equation_ratio(b, r.t, std::pow(b.eta(0, 0), 3)), 1e-8);
    for (cx L : Ls) EXPECT_LT(functional_equation_ratio(b, r.t, L), 1e-8);
    EXPECT_GT(r.tables.smallest_ratio2, 1e-6);
    EXPECT_LT(baxter_residual(b, r.t, r.tables), 1e-9);
  }
  EigenvaluePoly tp = f.recs[0].t;
  tp.coef[1] += 0.1;
  double worst = functional_equation_ratio(b, tp, std::pow(b.eta(0, 0), 3));
  for (cx L : Ls) worst = std::max(worst, functional_equation_ratio(b, tp, L));
  EXPECT_GT(worst, 1e-3);
}

TEST(Spectrum, DMatrixStructure) {
  const Fixture& f = generic(3, 2);
  const SovBasis& b = f.b();
  const Mat D = d_matrix(b, f.recs[0].t, 0);
  EXPECT_NE(D(0, 2), cx(0.0));
  EXPECT_NE(D(2, 0), cx(0.0));
  const Amplitudes& am = b.amplitudes();
  const cx l0 = b.eta(0, 0), al = am.orbit_constant_eps(l0, 1);
  auto abar = [&](cx l) { return al * am.a(l); };
  auto dbar = [&](cx l) { return am.d(l) / al; };
  const cx d1 = d_matrix(b.phase(), f.recs[0].t, l0, abar, dbar).determinant();
  const cx d2 = d_matrix(b.phase(), f.recs[0].t, b.phase().q * l0, abar, dbar).determinant();
  EXPECT_LT(std::abs(d1 - d2), 1e-10 * std::max(1.0, std::abs(d1)));
}

TEST(Spectrum, SovEigenstatesMatchOracle) {
  for (auto [p, N] : {std::pair{3, 2}, std::pair{3, 3}, std::pair{5, 2}}) {
    const Fixture& f = generic(p, N);
    for (const auto& r : f.recs) {
      EXPECT_GT(overlap(r.right, r.oracle_right), 1 - 1e-8);
      EXPECT_LT(eigen_residual(f.ch(), r.right, r.t, cx(0.4, 1.1)), 1e-8);
      EXPECT_LT((f.ch().theta() * r.right - f.ch().phase().qpow(r.k()) * r.right).norm() / r.right.norm(), 1e-10);
    }
  }
}

// ================================================================ separate_states

TEST(SeparateStates, AssemblyByHandSum) {
  const Fixture& f = generic(3, 2);
  const SovBasis& b = f.b();
  const std::vector<Vec> ones{Vec::Ones(3)};
  const Vec s = make_separate_state(b, {Side::Right, 0, ones});
  Vec hand = Vec::Zero(9);
  for (int i = 0; i < 9; ++i) {
    const Label h = label_from_index(i, 3, 2);
    hand += b.vandermonde(h) / b.omega_product(h) / std::sqrt(3.0) * b.right().col(i);
  }
  EXPECT_LT((s - hand).norm() / hand.norm(), 1e-14);
  EXPECT_LT((make_separate_state(b, {Side::Right, 3, ones}) - s).norm() / s.norm(), 1e-14);
  const auto& r = f.recs[2];
  EXPECT_LT((make_separate_state(b, {Side::Right, r.k(), r.tables.Q}) - r.right).norm(), 1e-14 * r.right.norm());
}

TEST(SeparateStates, DeterminantPairing) {
  for (int N : {2, 3}) {
    const Fixture& f = generic(3, N);
    const SovBasis& b = f.b();
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
      const int k = rng.integer(3);
      auto L = random_separate_state(b, Side::Left, k, rng);
      auto R = random_separate_state(b, Side::Right, k, rng);
      auto Rx = random_separate_state(b, Side::Right, (k + 1) % 3, rng);
      const Vec l = make_separate_state(b, L), r = make_separate_state(b, R), rx = make_separate_state(b, Rx);
      const cx direct = l.transpose() * r;
      EXPECT_LT(std::abs(pairing_determinant(b, L, R) - direct) / std::abs(direct), 1e-9);
      EXPECT_EQ(pairing_determinant(b, L, Rx), cx(0.0));
      EXPECT_LT(std::abs(cx(l.transpose() * rx)) / (l.norm() * rx.norm()), 1e-10);
    }
  }
}

TEST(SeparateStates, OrthogonalityWitness) {
  const Fixture& f = generic(3, 3);
  const SovBasis& b = f.b();
  for (const auto& x : f.recs)
    for (const auto& y : f.recs) {
      if (&x == &y || x.k() != y.k()) continue;
      const Mat M = pairing_matrix(b, x.tables.Qbar, y.tables.Q);
      const Vec V = orthogonality_witness(x.t, y.t);
      EXPECT_LT((M * V).norm() / (M.norm() * V.norm()), 1e-8);
      EXPECT_LT(witness_residual(b, x, y), 1e-8);
      EXPECT_LT(std::abs(M.determinant()) / std::pow(M.norm(), 2), 1e-8);
    }
}

TEST(SeparateStates, EigenstateDecomposition) {
  const Fixture& f = generic(3, 2);
  const Mat S = eigen_identity_decomposition(f.b(), f.recs);
  EXPECT_LT((S - Mat::Identity(9, 9)).norm(), 1e-7);
  EXPECT_LT(std::abs(S.trace() - 9.0), 1e-8);
  for (const auto& r : f.recs) {
    const cx direct = (r.left * r.right)(0, 0);
    EXPECT_LT(std::abs(eigen_norm(f.b(), r) - direct) / std::abs(direct), 1e-8);
  }
}

// ================================================================ chiral_potts

TEST(ChiralPotts, CurvePoints) {
  const Phase ph = Phase::make(3, 2);
  const CurvePoint P = CurvePoint::make(3, cx(0.4, 0.1), cx(0.9, 0.2), 1, 2, cx(1.1, -0.3));
  EXPECT_LT(P.curve_residual(3), 1e-12);
  const CurvePoint Pb = CurvePoint::make(3, cx(0.4, 0.1), cx(0.9, 0.2), 1 + 3, 2 + 3, cx(1.1, -0.3));
  EXPECT_LT(std::abs(P.x - Pb.x) + std::abs(P.y - Pb.y), 1e-14);
}

TEST(ChiralPotts, SuperIntegrablePoint) {
  // s^p = -1 gives x^p = y^p = (1 + k')/k; equal branches put both angles at pi/2.
  const Phase ph = Phase::make(3, 2);
  const double k = 0.5;
  const CurvePoint Q = CurvePoint::make(3, k, std::exp(I * kPi / 3.0), 0, 0, 1.0);
  const cx target = (1.0 + std::sqrt(1.0 - k * k)) / k;
  EXPECT_LT(std::abs(std::pow(Q.x, 3) - target), 1e-12);
  EXPECT_LT(std::abs(std::pow(Q.y, 3) - target), 1e-12);
  const VgrHamiltonian H = build_vgr_hamiltonian(ph, 2, Q);
  EXPECT_LT(std::abs(H.cos_theta), 1e-12);
  EXPECT_LT(std::abs(H.cos_theta_bar), 1e-12);
}

TEST(ChiralPotts, BoltzmannWeights) {
  const Phase ph = Phase::make(3, 2);
  ChpSetup st = sample_chp(ph, 2, 5, false);
  for (int i = 0; i < 3; ++i) {
    const CurvePoint P = st.random_point();
    EXPECT_LT(w_recursion_residual(ph, st.qs[0], P), 1e-10);
    EXPECT_LT(w_cyclicity_residual(ph, st.qs[0], P), 1e-10);
  }
}

TEST(ChiralPotts, HomogeneousCommutativityAndSimpleSpectrum) {
  for (int N : {2, 3}) {
    const Phase ph = Phase::make(3, 2);
    ChpSetup st = sample_chp(ph, N, 11, true);
    const Chain ch(st.model);
    const CurvePoint P1 = st.random_point(), P2 = st.random_point();
    const Mat T1 = chp_T(ph, P1, st.qs, st.rs), T2 = chp_T(ph, P2, st.qs, st.rs);
    EXPECT_LT(commutator_residual(T1, ch.tau2(cx(0.7, 0.2))).relative, 1e-8);
    EXPECT_LT(commutator_residual(T1, T2).relative, 1e-8);
    EXPECT_LT(commutator_residual(ch.theta(), T1).relative, 1e-8);
    const Vec w = Eigen::ComplexEigenSolver<Mat>(T1).eigenvalues();
    double gap = 1e300;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) gap = std::min(gap, std::abs(w(i) - w(j)) / w.cwiseAbs().maxCoeff());
    EXPECT_GT(gap, 1e-8);
  }
}

TEST(ChiralPotts, QOperatorFit) {
  const Phase ph = Phase::make(3, 2);
  ChpSetup st = sample_chp(ph, 2, 13, true);
  const Chain ch(st.model);
  const Amplitudes am(st.model);
  const QOperatorFit fit = verify_q_operator_property(ch, am, st, st.random_point());
  EXPECT_LT(fit.held_out_residual, 1e-7);
  EXPECT_LT(fit.average_residual, 1e-6);
}

TEST(ChiralPotts, IntertwiningAndPropagator) {
  const Phase ph = Phase::make(3, 2);
  ChpSetup st = sample_chp(ph, 3, 17, false);
  const Chain ch(st.model);
  const CurvePoint P1 = st.random_point(), P2 = st.random_point();
  EXPECT_LT(s_intertwining_residual(ph, st.qs[0], st.rs[0], P1, P2, st.c0, cx(0.8, 0.5)), 1e-9);
  EXPECT_EQ(propagator_inverse(ph, st.qs, st.rs, 1), Mat::Identity(27, 27));
  EXPECT_LT(propagator_residual(ch, propagator_inverse(ph, st.qs, st.rs, 2), 2, cx(0.73, 0.41)), 1e-8);
  EXPECT_LT(condition_number(s_operator(ph, st.qs[0], st.rs[0], P1, P2)), 1e8);
}

// ================================================================ local_operators

TEST(LocalOperators, UInverseAndAlpha0) {
  const Fixture& f = generic(3, 2);
  const auto c = make_context(f.ch(), f.am());
  const Mat u = local_u_inverse(f.ch(), 1);
  const TwoForms r = reconstruct_u_inverse(c, 1);
  EXPECT_LT(rel(r.first, u), 1e-8);
  EXPECT_LT(rel(r.first, r.second), 1e-9);
  EXPECT_LT(rel(mat_power(r.first, 3), Mat::Identity(9, 9)), 1e-8);
  const Mat a0 = direct_alpha0(f.ch(), f.am(), 1);
  const TwoForms ra = reconstruct_alpha0(c, 1);
  EXPECT_LT(rel(ra.first, a0), 1e-8);
  EXPECT_LT(rel(ra.first, ra.second), 1e-9);
}

TEST(LocalOperators, ChiralPottsSites) {
  const Phase ph = Phase::make(3, 2);
  ChpSetup st = sample_chp(ph, 2, 23, false);
  const Chain ch(st.model);
  const Amplitudes am(st.model);
  const auto c = make_context(ch, am, {propagator_inverse(ph, st.qs, st.rs, 1), propagator_inverse(ph, st.qs, st.rs, 2)});
  for (int n = 1; n <= 2; ++n) EXPECT_LT(rel(reconstruct_u_inverse(c, n).first, local_u_inverse(ch, n)), 1e-8);
}

TEST(LocalOperators, VPowers) {
  const Fixture& f = generic(3, 2);
  const auto c = make_context(f.ch(), f.am());
  const auto betas = beta_operators(c, 1);
  const Mat v2 = site_op(mat_power(local_v(f.ch().phase()), 2), 1, 2, 3);
  EXPECT_LT(rel(reconstruct_v_even_power(c, betas, 1, 1), v2), 1e-7);
  EXPECT_LT(rel(reconstruct_v_power(c, betas, 1, 3), Mat::Identity(9, 9)), 1e-8);
  EXPECT_LT(beta_sum_rule_residual(c, betas, 1), 1e-9);
  EXPECT_LT(beta_expansion_residual(f.ch(), f.am()), 1e-7);
}

TEST(LocalOperators, BInverseAPowers) {
  const Fixture& f = generic(3, 2);
  const LabelSpace ls(f.b());
  const cx lam(0.93, 0.27);
  const Op2 M = f.ch().monodromy(lam);
  const Mat BA = M.B.partialPivLu().solve(M.A);
  const Mat S = ls.to_label(BA);
  EXPECT_LT(rel(power_expansion_binvA(ls, lam, 2), S * S), 1e-8);
  const auto av = f.ch().average_matrix(std::pow(lam, 3));
  EXPECT_LT(rel(mat_power(BA, 3), av(0, 0) / av(0, 1) * Mat::Identity(9, 9)), 1e-9);
}

TEST(LocalOperators, QuantumMultinomialAtRootOfUnity) {
  const Phase ph = Phase::make(3, 2);
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j) {
      const cx v = q_multinomial({i, j, 3 - i - j}, ph.q);
      const bool single = i == 3 || j == 3 || i + j == 0;
      EXPECT_LT(std::abs(v - (single ? 1.0 : 0.0)), 1e-12) << i << "," << j;
    }
  const QMultinomialCheck c = q_multinomial_enumeration(ph);
  EXPECT_LT(c.enumeration, 1e-12);
}

TEST(LocalOperators, ElementaryOperatorAlgebra) {
  const Fixture& f = generic(3, 3);
  const ElementaryOps E(f.ch(), f.b());
  const ProdZeros pz = check_prod_zeros(E, 3, 3);
  EXPECT_LT(pz.worst_zero, 1e-10);
  EXPECT_GT(pz.smallest_nonzero, 1e-3);
  EXPECT_LT(check_mean_value(E, f.ch(), 3, 3), 1e-9);
  EXPECT_LT(check_exchange(E, f.b()), 1e-9);
  EXPECT_LT(rel(E.monomial(0, 0, {}), Mat::Identity(27, 27)), 1e-12);
}

TEST(LocalOperators, ElementarySpanning) {
  const Fixture& f = generic(3, 2);
  const ElementaryOps E(f.ch(), f.b());
  const SpanningReport sr = elementary_spanning(E, f.b(), {local_u_inverse(f.ch(), 1)});
  EXPECT_EQ(sr.rank, 81);
  EXPECT_LT(sr.residuals[0], 1e-8);
}

// ================================================================ form_factors

TEST(FormFactors, ShiftEigenvalue) {
  const Fixture& f = generic(3, 2);
  for (const auto& r : f.recs) EXPECT_EQ(shift_eigenvalue(r, Mat::Identity(9, 9)).phi, cx(1.0));
  const Phase ph = Phase::make(3, 2);
  RunConfig c = config(3, 3);
  auto st = acquire_setup(c, ParamMode::ChpCurve, "chp/inhomogeneous");
  const auto recs = assemble_spectrum(st->basis, oracle_eigensystem(st->chain));
  const Mat U = propagator_inverse(ph, st->chp->qs, st->chp->rs, 2).inverse();
  for (const auto& r : recs) EXPECT_LT(shift_eigenvalue(r, U).residual, 1e-7);
}

TEST(FormFactors, UInverseAllPairs) {
  const Fixture& f = generic(3, 2);
  const FormFactorContext c{&f.ch(), &f.am(), &f.b(), &f.recs, Mat::Identity(9, 9), 1};
  const auto rows = ff_u_inverse(c);
  ASSERT_EQ(rows.size(), 81u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.selected, mod(r.k - r.k_prime - 1, 3) == 0);
    if (r.selected)
      EXPECT_LT(r.rel_err, 1e-7);
    else {
      EXPECT_EQ(r.det_value, cx(0.0));
      EXPECT_LT(r.rel_err, 1e-10);
    }
  }
  EXPECT_LT(u_matrix_lambda_check(f.ch(), f.b(), f.recs, cx(0.81, 0.44)), 1e-7);
  EXPECT_LT(u_matrix_lambda_check(f.ch(), f.b(), f.recs, cx(-1.2, 0.3)), 1e-7);
}

TEST(FormFactors, Alpha0InverseAllPairs) {
  const Fixture& f = generic(3, 2);
  const FormFactorContext c{&f.ch(), &f.am(), &f.b(), &f.recs, Mat::Identity(9, 9), 1};
  for (const auto& r : ff_alpha0_inverse(c)) EXPECT_LT(r.rel_err, r.selected ? 1e-7 : 1e-10);
  const Mat a0 = direct_alpha0(f.ch(), f.am(), 1);
  EXPECT_LT(rel(a0.inverse() * a0, Mat::Identity(9, 9)), 1e-12);
}

TEST(FormFactors, ElementaryOperators) {
  const Fixture& f2 = generic(3, 2);
  // Empty index: the determinant reduces to the scalar product.
  for (const auto& x : f2.recs)
    for (const auto& y : f2.recs) {
      const cx e = elementary_determinant(f2.b(), x, y, 0, 0, {});
      const cx s = pairing_determinant(f2.b(), {Side::Left, x.k(), x.tables.Qbar}, {Side::Right, y.k(), y.tables.Q});
      EXPECT_LT(std::abs(e - s), 1e-10 * std::max(1.0, std::abs(s)));
    }
  const Fixture& f3 = generic(3, 3);
  const ElementaryOps E(f3.ch(), f3.b());
  for (const auto& r : ff_elementary(E, f3.b(), f3.recs, 0, 0, {{0, 1, 1}}, "E"))
    EXPECT_LT(r.rel_err, r.selected ? 1e-6 : 1e-10);
}

TEST(FormFactors, NormalizationInvariance) {
  const Fixture& f = generic(3, 2);
  const ElementaryOps E(f.ch(), f.b());
  Rng rng(31);
  const InvarianceReport inv = normalization_invariance(f.ch(), f.am(), f.b(), E, f.recs, rng);
  EXPECT_GT(inv.pairs, 0);
  EXPECT_LT(inv.rescale_change, 1e-9);
  EXPECT_LT(inv.oracle_error, 1e-7);
}

TEST(FormFactors, HamiltonianAndOrderParameter) {
  const RunConfig c = config(3, 3, ParamMode::HomogeneousChp);
  auto st = acquire_setup(c, ParamMode::HomogeneousChp, "chp/self-adjoint");
  const Phase ph = c.phase();
  const VgrHamiltonian H = build_vgr_hamiltonian(ph, 3, st->chp->qs[0]);
  const Mat T = chp_T(ph, st->chp->random_point(), st->chp->qs, st->chp->rs);
  EXPECT_LT(commutator_residual(H.H, T).relative, 1e-6);
  EXPECT_LT(commutator_residual(H.H, st->chain.theta()).relative, 1e-10);
  EXPECT_LT(rel(H.H, H.H.adjoint()), 1e-10);
  const auto recs = assemble_spectrum(st->basis, oracle_eigensystem(st->chain));
  for (const auto& row : order_parameter_table(st->chain, st->amps, st->basis, recs, H.H)) {
    EXPECT_LT(row.rel_err, 1e-6);
    EXPECT_LE(row.magnitude, 1.0 + 1e-12);
  }
}

// ================================================================ cli plumbing

TEST(Cli, ConfigValidation) {
  const RunConfig c = config_from_string("[model]\np = 5\np_prime = 2\nn_sites = 2\nseed = 7\n");
  EXPECT_EQ(c.p, 5);
  EXPECT_EQ(c.seed, 7u);
  try {
    config_from_string("[model]\np = 4\np_prime = 2\nn_sites = 2\n");
    FAIL() << "even p accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("odd"), std::string::npos);
  }
  EXPECT_THROW(config_from_string("[model]\np = 3\np_prime = 3\nn_sites = 2\n"), ConfigError);
  EXPECT_THROW(config_from_string("[model]\np = 3\np_prime = 2\nn_sites = 9\n"), ConfigError);
  EXPECT_THROW(config_from_string("[model]\np = 3\np_prime = 2\nn_sites = 2\n[tolerances]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(config_from_string("[model]\np = 3\nn_sites = 2\n"), ConfigError);
}

TEST(Cli, SeedSplitting) {
  EXPECT_EQ(sub_seed(42, "model/generic"), sub_seed(42, "model/generic"));
  EXPECT_NE(sub_seed(42, "model/generic"), sub_seed(42, "model/generic", 1));
  EXPECT_NE(sub_seed(42, "model/generic"), sub_seed(43, "model/generic"));
}

TEST(Cli, ReportSerialization) {
  const SuiteReport empty{"algebra", {}, {}, 0};
  const auto j = nlohmann::ordered_json::parse(report_json(empty, {}).dump());
  EXPECT_EQ(j["schema"], 1);
  EXPECT_TRUE(j["checks"].is_array());
  EXPECT_TRUE(j["checks"].empty());
  SuiteReport bad{"x", {make_check("c", "a", 1.0, 0.5)}, {}, 0};
  EXPECT_FALSE(bad.passed());
  EXPECT_EQ(report_json(bad, {})["checks"][0]["pass"], false);
}

TEST(Cli, AlgebraSuiteIsByteStable) {
  const RunConfig c = config(3, 2);
  const SuiteReport a = run_suite(c, "algebra"), b = run_suite(c, "algebra");
  EXPECT_GE(a.checks.size(), 6u);
  EXPECT_TRUE(a.passed());
  EXPECT_EQ(report_json(a, {}).dump(2), report_json(b, {}).dump(2));
}

TEST(Cli, FormFactorCsvRows) {
  const SuiteReport r = run_suite(config(3, 2), "formfactor");
  std::vector<FormFactorResult> u;
  for (const auto& f : r.form_factors)
    if (f.op == "u_inverse") u.push_back(f);
  EXPECT_EQ(u.size(), 81u);
  const std::string csv = to_csv(u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 82);
  EXPECT_EQ(to_csv(form_factors_from_json(report_json(r, {}))), to_csv(r.form_factors));
}

TEST(Cli, GenericityRetryExhaustion) {
  RunConfig c = config(3, 2);
  c.gate.max_condition = 1.0;
  EXPECT_THROW(run_suite(c, "sov"), NonGenericError);
}

}  // namespace
}  // namespace sovlat
