#include <gtest/gtest.h>

#include <cmath>

#include "modham/error.hpp"
#include "modham/precision.hpp"
#include "modham/reference_oracles.hpp"
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

double d(const OracleReal& x) { return x.convert_to<double>(); }

double rel_err(double got, const OracleReal& want) {
  return std::abs(got - d(want)) / std::abs(d(want));
}

}  // namespace

TEST(SingleMode, UnitMode) {
  auto o = oracle_single_mode(1, 1);
  EXPECT_EQ(d(o.c), 1.0);
  EXPECT_NEAR(d(o.M), std::log(3.0) / 2, 1e-16);
  EXPECT_NEAR(d(o.N), std::log(3.0) / 2, 1e-16);
  EXPECT_NEAR(d(o.L[0][1]), std::log(3.0), 1e-15);
  EXPECT_NEAR(d(o.L[1][0]), -std::log(3.0), 1e-15);
  EXPECT_EQ(d(o.L[0][0]), 0.0);
  // S = (c + 1/2) ln(c + 1/2) - (c - 1/2) ln(c - 1/2)
  EXPECT_NEAR(d(o.entropy), 1.5 * std::log(1.5) - 0.5 * std::log(0.5), 1e-15);
}

TEST(SingleMode, AsymmetricPair) {
  auto o = oracle_single_mode(2, 1);
  using boost::multiprecision::log;
  using boost::multiprecision::sqrt;
  OracleReal c = sqrt(OracleReal(2));
  OracleReal lg = log((2 * c + 1) / (2 * c - 1));
  EXPECT_LE(d(abs(o.c - c)), 1e-45);
  EXPECT_LE(d(abs(o.M - lg / (2 * c))), 1e-45);
  EXPECT_LE(d(abs(o.N - 2 * lg / (2 * c))), 1e-45);
  EXPECT_LE(d(abs(o.N - 2 * o.M)), 1e-45);
}

TEST(SingleMode, BoundaryAndDomain) {
  EXPECT_EQ(kind_of([] { oracle_single_mode(0.5, 0.5); }), ErrorKind::ModularDivergence);
  EXPECT_EQ(kind_of([] { oracle_single_mode(0.5, 0.4); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { oracle_single_mode(-1, -1); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { oracle_single_mode(0, 1); }), ErrorKind::Domain);
}

// every 1-site region of a chain matches the scalar closed form
TEST(SingleMode, AgreesWithPipelineOnOneSiteRegions) {
  for (double m : {0.1, 1.0}) {
    auto st = vacuum_state<double>(chain(8, m));
    for (int s = 0; s < 8; ++s) {
      auto rc = restrict_correlators(st, Region::from_sites({s}, 8));
      auto k = mn_kernels(rc);
      auto o = oracle_single_mode(rc.X_R(0, 0), rc.P_R(0, 0));
      EXPECT_LE(rel_err(k.M(0, 0), o.M), 1e-12) << "m=" << m << " site " << s;
      EXPECT_LE(rel_err(k.N(0, 0), o.N), 1e-12);
      EXPECT_LE(rel_err(k.L_block(0, 1), o.L[0][1]), 1e-12);
      EXPECT_LE(rel_err(k.L_block(1, 0), o.L[1][0]), 1e-12);
      EXPECT_LE(rel_err(entanglement_entropy(k), o.entropy), 1e-12);
    }
  }
}

TEST(SingleMode, AgreesWithMultiprecisionPipeline) {
  PrecisionScope ps(60);
  auto st = vacuum_state<Real>(chain(16, 1.0));
  auto rc = restrict_correlators(st, Region::from_sites({5}, 16));
  auto k = mn_kernels(rc);
  auto o = oracle_single_mode(OracleReal(rc.X_R(0, 0).str(60)), OracleReal(rc.P_R(0, 0).str(60)));
  EXPECT_LE(std::abs(to_double(k.M(0, 0)) - d(o.M)) / d(o.M), 1e-15);
  EXPECT_LE(std::abs(to_double(k.N(0, 0)) - d(o.N)) / d(o.N), 1e-15);
}

TEST(Fock, TwoSiteUnitMass) {
  auto model = chain(2, 1.0);
  auto f = oracle_reduced_density_matrix(model, 24);
  auto st = vacuum_state<double>(model);
  auto k = mn_kernels(restrict_correlators(st, Region::from_sites({0}, 2)));
  EXPECT_LE(std::abs(f.entropy - entanglement_entropy(k)), 1e-6);
  EXPECT_NEAR(f.trace, 1.0, 1e-8);
  EXPECT_NEAR(f.c, k.c_spectrum(0), 1e-12);
  EXPECT_LE(std::abs(f.level_ratio - f.q), 1e-6);
  EXPECT_LE(std::abs(f.entropy_at_n_max_plus_4 - f.entropy), 1e-6);
}

TEST(Fock, SpectrumIsGeometric) {
  auto f = oracle_reduced_density_matrix(chain(2, 1.0), 24);
  ASSERT_GE(f.occupation_spectrum.size(), 6u);
  for (size_t k = 1; k < 6; ++k)
    EXPECT_NEAR(f.occupation_spectrum[k] / f.occupation_spectrum[k - 1], f.q, 1e-6);
  // lambda_k = (1 - q) q^k
  EXPECT_NEAR(f.occupation_spectrum[0], 1 - f.q, 1e-8);
}

TEST(Fock, FamilyAgreesWithCorrelatorRoute) {
  for (double m : {0.5, 1.0, 2.0}) {
    auto model = chain(2, m);
    auto f = oracle_reduced_density_matrix(model, 16);
    auto k = mn_kernels(restrict_correlators(vacuum_state<double>(model), Region::from_sites({0}, 2)));
    EXPECT_LE(std::abs(f.entropy - entanglement_entropy(k)), 1e-6) << "m=" << m;
  }
}

TEST(Fock, DecoupledSitesAreProduct) {
  auto f = oracle_reduced_density_matrix(chain(2, 1.0, 1e-8), 12);
  EXPECT_LE(f.entropy, 1e-6);
}

TEST(Fock, Errors) {
  EXPECT_EQ(kind_of([] { oracle_reduced_density_matrix(chain(3, 1.0), 12); }),
            ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { oracle_reduced_density_matrix(chain(2, 1.0), 4); }),
            ErrorKind::InvalidParameter);
  // periodic soft mode at omega = m is strongly squeezed: 8 levels cannot hold it
  EXPECT_EQ(kind_of([] { oracle_reduced_density_matrix(chain(2, 1e-2, 1.0, Boundary::Periodic), 8); }),
            ErrorKind::TruncationNotConverged);
}

TEST(ResolventScalar, UnitArgument) {
  auto o = oracle_resolvent_scalar(1.0, 1e-10);
  EXPECT_NEAR(d(o.closed_form), -std::log(3.0) / 4, 1e-16);
  EXPECT_LE(o.discrepancy, 1e-10);
}

TEST(ResolventScalar, NearSingular) {
  auto o = oracle_resolvent_scalar(0.5001, 1e-8);
  EXPECT_LE(o.discrepancy, 1e-8);
  EXPECT_LT(d(o.integral), -1.0);  // log-divergent as z -> 1/2
}

TEST(ResolventScalar, Domain) {
  EXPECT_EQ(kind_of([] { oracle_resolvent_scalar(0.4, 1e-10); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { oracle_resolvent_scalar(0.5, 1e-10); }), ErrorKind::Domain);
}

TEST(PrecisionPlan, GrowsWithGap) {
  auto small = plan_precision(chain(8, 1.0), Region::half(8));
  auto big = plan_precision(chain(32, 1.0), Region::half(32));
  EXPECT_FALSE(small.degenerate);
  EXPECT_GE(small.digits, 40u);
  EXPECT_GT(big.digits, small.digits);
  EXPECT_LT(big.gap_log10, small.gap_log10);
  // digits cover twice the gap plus the guard
  EXPECT_GE(double(big.digits), -2 * big.gap_log10 + 40 - 1);
}

TEST(PrecisionPlan, DegenerateRegions) {
  auto p = plan_precision(chain(8, 1.0), Region::from_sites({0, 1, 2, 3, 4, 5, 6, 7}, 8));
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.digits, 40u);
  EXPECT_EQ(kind_of([] { plan_precision(chain(8, 1.0), Region::half(16)); }),
            ErrorKind::IndexOutOfRange);
}

TEST(PrecisionPlan, CapIsEnforced) {
  PrecisionOptions opt;
  opt.max_digits = 60;
  EXPECT_EQ(kind_of([&] { plan_precision(chain(64, 1.0), Region::half(64), opt); }),
            ErrorKind::Numerical);
}
