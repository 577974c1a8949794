#include <gtest/gtest.h>

#include <cmath>

#include "modham/error.hpp"
#include "modham/region_kernels.hpp"
#include "test_support.hpp"

using namespace modham;
using namespace modham::testing;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no modham::Error thrown";
  return ErrorKind::Numerical;
}

RestrictedCorrelators<double> scalar_rc(double x, double p) {
  RestrictedCorrelators<double> rc;
  rc.region = Region::from_sites({0}, 1);
  rc.X_R = Eigen::MatrixXd::Constant(1, 1, x);
  rc.P_R = Eigen::MatrixXd::Constant(1, 1, p);
  return rc;
}

}  // namespace

TEST(RestrictCorrelators, FullRegionOfPureState) {
  auto st = vacuum_state<double>(chain(6, 0.5));
  auto rc = restrict_correlators(st, Region::interval(0, 6, 6));
  Eigen::EigenSolver<Eigen::MatrixXd> es(rc.X_R * rc.P_R);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(es.eigenvalues()(i).real(), 0.25, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(i).imag(), 0.0, 1e-12);
  }
}

TEST(RestrictCorrelators, TwoSiteClosedForm) {
  // V = [[3, -1], [-1, 3]] has eigenvalues 2 and 4 on (1, 1)/sqrt2 and (1, -1)/sqrt2
  auto st = vacuum_state<double>(chain(2, 1.0));
  auto rc = restrict_correlators(st, Region::from_sites({0}, 2));
  double x = 0.25 * (1 / std::sqrt(2.0) + 0.5);
  double p = 0.25 * (std::sqrt(2.0) + 2.0);
  EXPECT_NEAR(rc.X_R(0, 0), x, 1e-15);
  EXPECT_NEAR(rc.P_R(0, 0), p, 1e-15);
  EXPECT_GT(x * p - 0.25, 1e-3);
}

TEST(RestrictCorrelators, SymmetricPrincipalSubmatrices) {
  auto st = vacuum_state<double>(chain(10, 0.3));
  std::mt19937 rng(5);
  for (int k = 0; k < 10; ++k) {
    std::vector<int> sites;
    for (int i = 0; i < 10; ++i)
      if (rng() % 3 == 0) sites.push_back(i);
    if (sites.empty()) sites.push_back(4);
    auto rc = restrict_correlators(st, Region::from_sites(sites, 10));
    EXPECT_LE((rc.X_R - rc.X_R.transpose()).norm(), 1e-12);
    EXPECT_LE((rc.P_R - rc.P_R.transpose()).norm(), 1e-12);
    for (size_t i = 0; i < sites.size(); ++i)
      EXPECT_EQ(rc.X_R(i, i), st.X_full(sites[i], sites[i]));
  }
}

TEST(RestrictCorrelators, Errors) {
  auto st = vacuum_state<double>(chain(4, 1.0));
  EXPECT_EQ(kind_of([&] { restrict_correlators(st, Region::from_sites({}, 4)); }),
            ErrorKind::EmptyRegion);
  GaussianState<double> bad = st;
  bad.P_full *= 0.5;  // 4XP = 1/2: not a state
  EXPECT_EQ(kind_of([&] { restrict_correlators(bad, Region::half(4)); }),
            ErrorKind::PositivityViolation);
}

TEST(ComputeC, Scalars) {
  EXPECT_NEAR(compute_C(scalar_rc(1, 1))(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(compute_C(scalar_rc(0.5, 0.5))(0, 0), 0.5, 1e-15);
}

TEST(ComputeC, RandomPairSquaresToProduct) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    Eigen::MatrixXd q1 = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix<double>(4, 4, seed))
                             .householderQ();
    Eigen::MatrixXd q2 = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix<double>(4, 4, seed + 50))
                             .householderQ();
    Eigen::Vector4d dx(0.3, 0.8, 1.5, 4.0), ds(0.26, 0.5, 1.0, 3.0);
    Eigen::MatrixXd x = q1 * dx.asDiagonal() * q1.transpose();
    Eigen::MatrixXd s = q2 * ds.asDiagonal() * q2.transpose();
    // P = X^{-1/2} S X^{-1/2} so that XP ~ S, spec(XP) = ds > 1/4
    Eigen::MatrixXd xis = q1 * dx.cwiseSqrt().cwiseInverse().asDiagonal() * q1.transpose();
    RestrictedCorrelators<double> rc;
    rc.region = Region::half(8);
    rc.X_R = x;
    rc.P_R = xis * s * xis;
    rc.P_R = symmetrized<double>(rc.P_R);
    Eigen::MatrixXd c = compute_C(rc);
    Eigen::MatrixXd xp = rc.X_R * rc.P_R;
    EXPECT_LE((c * c - xp).norm() / xp.norm(), 1e-10);
    auto sp = symplectic_spectrum(rc);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(sp.c(i) * sp.c(i), ds(i), 1e-12);
  }
}

TEST(ComputeC, IllConditionedX) {
  RestrictedCorrelators<double> rc;
  rc.region = Region::half(4);
  rc.X_R = Eigen::Vector2d(1.0, 1e-13).asDiagonal();
  rc.P_R = Eigen::Vector2d(1.0, 1e13).asDiagonal();
  EXPECT_EQ(kind_of([&] { compute_C(rc); }), ErrorKind::Numerical);
}

TEST(MnKernels, ScalarUnitMode) {
  auto k = mn_kernels(scalar_rc(1, 1));
  EXPECT_NEAR(k.M(0, 0), std::log(3.0) / 2, 1e-15);
  EXPECT_NEAR(k.N(0, 0), std::log(3.0) / 2, 1e-15);
  EXPECT_NEAR(k.L_block(0, 1), std::log(3.0), 1e-15);
  EXPECT_NEAR(k.L_block(1, 0), -std::log(3.0), 1e-15);
  EXPECT_EQ(k.L_block(0, 0), 0.0);
  EXPECT_EQ(k.L_block(1, 1), 0.0);
}

TEST(MnKernels, ScalarGeneral) {
  double x = 2.0, p = 1.0, c = std::sqrt(2.0);
  auto k = mn_kernels(scalar_rc(x, p));
  double f = std::log((2 * c + 1) / (2 * c - 1)) / (2 * c);
  EXPECT_NEAR(k.M(0, 0), p * f, 1e-15);
  EXPECT_NEAR(k.N(0, 0), x * f, 1e-15);
}

TEST(MnKernels, ScalarIntegralIdentity) {
  // 4 int_1^inf dt / (1 - 4 t^2 z^2) = -(1/z) ln((2z+1)/(2z-1)) at z = 1
  QuadratureOptions qo;
  auto v = integrate_from_one<double>(
      [](double t) { return Eigen::MatrixXd::Constant(1, 1, 1.0 / (1.0 - 4.0 * t * t)); }, qo,
      nullptr);
  EXPECT_NEAR(4 * v(0, 0), -std::log(3.0), 1e-10);
}

TEST(MnKernels, FullRegionDiverges) {
  auto st = vacuum_state<double>(chain(5, 1.0));
  auto rc = restrict_correlators(st, Region::interval(0, 5, 5));
  try {
    mn_kernels(rc);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModularDivergence);
    EXPECT_EQ(e.values().size(), 5u);
  }
}

TEST(MnKernels, ClipReportsModes) {
  auto st = vacuum_state<double>(chain(8, 1.0));
  auto rc = restrict_correlators(st, Region::half(8));  // smallest c - 1/2 ~ 1e-15
  KernelOptions opt;
  opt.clip = 1e-8;
  auto k = mn_kernels(rc, opt);
  ASSERT_FALSE(k.clipped_modes.empty());
  EXPECT_EQ(k.clipped_modes.front(), 0);
  EXPECT_TRUE(k.L_block.allFinite());
  EXPECT_EQ(kind_of([&] { mn_kernels(rc); }), ErrorKind::ModularDivergence);
}

TEST(MnKernels, StructuralInvariantsBenign) {
  auto st = vacuum_state<double>(chain(8, 0.1));
  auto rc = restrict_correlators(st, Region::centered(2, 8));
  auto k = mn_kernels(rc);
  Eigen::MatrixXd xp = rc.X_R * rc.P_R;
  EXPECT_LE((k.C * k.C - xp).norm() / xp.norm(), 1e-9);
  for (int i = 0; i < k.c_spectrum.size(); ++i) EXPECT_GE(k.c_spectrum(i), 0.5 - 1e-10);
  EXPECT_LE((k.M - k.M.transpose()).norm() / k.M.norm(), 1e-8);
  EXPECT_LE((k.N - k.N.transpose()).norm() / k.N.norm(), 1e-8);
  // Gram_R L antisymmetric
  const int r = rc.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(2 * r, 2 * r);
  gram.topLeftCorner(r, r) = rc.X_R;
  gram.bottomRightCorner(r, r) = rc.P_R;
  Eigen::MatrixXd gl = gram * k.L_block;
  EXPECT_LE((gl + gl.transpose()).norm() / gl.norm(), 1e-8);
}

TEST(MnKernels, InvariantsMultiprecision) {
  auto model = chain(16, 1.0);
  Region r = Region::half(16);
  PrecisionScope ps(digits_for(model, r));
  auto st = vacuum_state<Real>(model);
  auto rc = restrict_correlators(st, r);
  auto k = mn_kernels(rc);
  Mat<Real> xp = rc.X_R * rc.P_R;
  EXPECT_LE(rel<Real>(Mat<Real>(k.C * k.C), xp), 1e-9);
  EXPECT_LE(rel<Real>(k.M, Mat<Real>(k.M.transpose())), 1e-8);
  EXPECT_LE(rel<Real>(k.N, Mat<Real>(k.N.transpose())), 1e-8);
  EXPECT_GT(to_double(Real(k.c_spectrum(0) - Real(0.5))), 0.0);
}

TEST(MnKernels, AgreesWithArccotSplit) {
  auto model = chain(8, 1.0);
  Region r = Region::half(8);
  PrecisionScope ps(digits_for(model, r));
  auto st = vacuum_state<Real>(model);
  auto k = mn_kernels(restrict_correlators(st, r));
  Mat<Real> split = region_block<Real>(lndelta_arccot_split(st, r), r);
  EXPECT_LE(rel<Real>(k.L_block, split), 1e-7);
}

TEST(GRoute, ScalarUnitMode) {
  auto g = lndelta_region_via_G(scalar_rc(1, 1));
  EXPECT_NEAR(g.L(0, 1), std::log(3.0), 1e-14);
  EXPECT_NEAR(g.L(1, 0), -std::log(3.0), 1e-14);
  EXPECT_LE(g.max_imag_residual, 1e-10);
}

TEST(GRoute, MiddleSixSitesOfSixteen) {
  auto model = chain(16, 1.0);
  Region r = Region::centered(6, 16);
  PrecisionScope ps(digits_for(model, r));
  auto st = vacuum_state<Real>(model);
  auto rc = restrict_correlators(st, r);
  auto g = lndelta_region_via_G(rc);
  EXPECT_LE(g.max_imag_residual, 1e-10);
  EXPECT_LE(rel<Real>(g.L, mn_kernels(rc).L_block), 1e-8);
}

TEST(BlockQuadrature, MatchesMnKernels) {
  auto st = vacuum_state<double>(chain(8, 0.1));
  auto rc = restrict_correlators(st, Region::centered(2, 8));
  QuadratureOptions qo;
  auto q = resolvent_quadrature_generator(rc, qo);
  EXPECT_LE(rel<double>(q.value, mn_kernels(rc).L_block), 1e-9);
}

TEST(ComplementKernels, MirrorOfHalfChain) {
  auto model = chain(8, 1.0);
  Region r = Region::half(8);
  PrecisionScope ps(digits_for(model, r));
  auto st = vacuum_state<Real>(model);
  auto k = mn_kernels(restrict_correlators(st, r));
  auto ck = complement_kernels(st, r);
  Mat<Real> mirror = Mat<Real>::Zero(8, 8);
  for (int i = 0; i < 4; ++i) {
    mirror(i, 3 - i) = 1;
    mirror(4 + i, 7 - i) = 1;
  }
  EXPECT_LE(rel<Real>(Mat<Real>(mirror * ck.L_block * mirror.transpose()), k.L_block), 1e-9);
  // the full generator's complement block carries the opposite sign
  Mat<Real> lc = region_block<Real>(lndelta_arccot_split(st, r), r.complement());
  EXPECT_LE(rel<Real>(lc, Mat<Real>(-ck.L_block)), 1e-9);
}

TEST(ComplementKernels, TwoSites) {
  auto st = vacuum_state<double>(chain(2, 1.0));
  auto ck = complement_kernels(st, Region::from_sites({0}, 2));
  EXPECT_EQ(ck.region.sites(), (std::vector<int>{1}));
  EXPECT_TRUE(ck.L_block.allFinite());
  auto k = mn_kernels(restrict_correlators(st, Region::from_sites({0}, 2)));
  EXPECT_NEAR(ck.L_block(0, 1), k.L_block(0, 1), 1e-14);
}

TEST(ComplementKernels, FullRegion) {
  auto st = vacuum_state<double>(chain(3, 1.0));
  EXPECT_EQ(kind_of([&] { complement_kernels(st, Region::interval(0, 3, 3)); }),
            ErrorKind::EmptyRegion);
}

TEST(Entropy, Examples) {
  EXPECT_EQ(entanglement_entropy<double>(Eigen::VectorXd::Constant(3, 0.5)), 0.0);
  Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_NEAR(entanglement_entropy<double>(one), 1.5 * std::log(1.5) - 0.5 * std::log(0.5), 1e-15);
  EXPECT_NEAR(entanglement_entropy<double>(one), 0.9548, 1e-4);
}

TEST(RouteAgreement, RegionRoutesSixteenSites) {
  for (double m : {0.1, 1.0})
    for (const Region& r : {Region::half(16), Region::centered(4, 16),
                            Region::from_sites({2, 3, 10, 11}, 16)}) {
      auto model = chain(16, m);
      PrecisionScope ps(digits_for(model, r));
      auto st = vacuum_state<Real>(model);
      auto rc = restrict_correlators(st, r);
      auto k = mn_kernels(rc);
      Mat<Real> a = region_block<Real>(st.I_mat, lndelta_full(st, r), r);
      QuadratureOptions qo;
      auto c = resolvent_quadrature_generator(rc, qo);
      auto g = lndelta_region_via_G(rc);
      EXPECT_LE(rel<Real>(a, k.L_block), 1e-7);
      EXPECT_LE(rel<Real>(c.value, k.L_block), 1e-7);
      EXPECT_LE(rel<Real>(g.L, k.L_block), 1e-7);
    }
}
