#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "modham/error.hpp"
#include "test_support.hpp"

using namespace modham;
using namespace modham::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no modham::Error thrown";
  return ErrorKind::Numerical;
}

}  // namespace

TEST(HarmonicChain, OneSiteDirichlet) {
  auto m = chain(1, 1.0);
  ASSERT_EQ(m.dynamical_matrix.rows(), 1);
  EXPECT_DOUBLE_EQ(m.dynamical_matrix(0, 0), 3.0);
}

TEST(HarmonicChain, TwoSiteLaplacian) {
  auto m = chain(2, 0.0);
  Eigen::Matrix2d want;
  want << 2, -1, -1, 2;
  EXPECT_EQ(m.dynamical_matrix, Eigen::MatrixXd(want));
}

TEST(HarmonicChain, PeriodicMasslessIsZeroMode) {
  EXPECT_EQ(kind_of([] { chain(3, 0.0, 1.0, Boundary::Periodic); }), ErrorKind::ZeroMode);
}

TEST(HarmonicChain, PeriodicCouplesEnds) {
  auto m = chain(4, 0.5, 1.0, Boundary::Periodic);
  EXPECT_DOUBLE_EQ(m.dynamical_matrix(0, 3), -1.0);
  EXPECT_DOUBLE_EQ(m.dynamical_matrix(3, 0), -1.0);
  EXPECT_DOUBLE_EQ(m.dynamical_matrix(0, 0), 2.25);
}

TEST(HarmonicChain, BadParameters) {
  EXPECT_EQ(kind_of([] { chain(0, 1.0); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { chain(4, 1.0, 0.0); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { chain(4, 1.0, -1.0); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { chain(4, -1.0); }), ErrorKind::InvalidParameter);
}

TEST(HarmonicChain, DirichletSpectrumClosedForm) {
  for (int n : {1, 5, 16, 33})
    for (double m : {0.0, 0.3, 2.0}) {
      auto model = chain(n, m, 1.7);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.dynamical_matrix);
      std::vector<double> want;
      for (int k = 1; k <= n; ++k)
        want.push_back(m * m + 2 * 1.7 * (1 - std::cos(k * std::numbers::pi / (n + 1))));
      std::sort(want.begin(), want.end());
      for (int k = 0; k < n; ++k) EXPECT_NEAR(es.eigenvalues()(k), want[k], 1e-12);
    }
}

TEST(HarmonicChain, BoundaryNames) {
  EXPECT_EQ(parse_boundary("dirichlet"), Boundary::Dirichlet);
  EXPECT_EQ(parse_boundary("Periodic"), Boundary::Periodic);
  EXPECT_EQ(to_string(Boundary::Periodic), "periodic");
  EXPECT_THROW(parse_boundary("open"), Error);
}

TEST(VacuumState, ScalarSquareRoot) {
  auto st = vacuum_state<double>(chain(1, 0.0, 2.0));  // V = [[4]]
  EXPECT_DOUBLE_EQ(st.X_full(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(st.P_full(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(4 * st.X_full(0, 0) * st.P_full(0, 0), 1.0);
}

TEST(VacuumState, PurityAndComplexStructure) {
  for (auto model : {chain(2, 0.0), chain(8, 1.0), chain(16, 0.1), chain(9, 0.2, 1.0, Boundary::Periodic)}) {
    auto st = vacuum_state<double>(model);
    const int n = model.n_sites;
    Eigen::MatrixXd one = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd one2 = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    EXPECT_LE((4 * st.X_full * st.P_full - one).norm(), 1e-12);
    EXPECT_LE((st.I_mat * st.I_mat + one2).norm(), 1e-12);
    // eps I = 2 Re G = 2 diag(X, P)
    Eigen::MatrixXd re_g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    re_g.topLeftCorner(n, n) = st.X_full;
    re_g.bottomRightCorner(n, n) = st.P_full;
    EXPECT_LE((st.epsilon * st.I_mat - 2 * re_g).norm(), 1e-13);
    EXPECT_LE((st.mu_gram - 0.5 * st.epsilon * st.I_mat).norm(), 1e-14);
    EXPECT_LE((st.mu_gram - st.mu_gram.transpose()).norm(), 1e-15);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(st.mu_gram).eigenvalues()(0), 0.0);
  }
}

TEST(VacuumState, MultiprecisionPurity) {
  PrecisionScope ps(60);
  auto st = vacuum_state<Real>(chain(8, 1.0));
  Mat<Real> d = Real(4) * st.X_full * st.P_full - Mat<Real>::Identity(8, 8);
  EXPECT_LE(to_double(Real(d.norm())), 1e-55);
}

TEST(SymplecticProduct, BasisPairing) {
  auto st = vacuum_state<double>(chain(3, 1.0));
  PhaseSpaceVector<double> f{Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Zero(3)};
  PhaseSpaceVector<double> g{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Unit(3, 0)};
  EXPECT_DOUBLE_EQ(symplectic_product(st, f, g), 0.5);
  EXPECT_DOUBLE_EQ(symplectic_product(st, g, f), -0.5);
  EXPECT_DOUBLE_EQ(symplectic_product(st, f, f), 0.0);
}

TEST(SymplecticProduct, DimensionMismatch) {
  auto st = vacuum_state<double>(chain(3, 1.0));
  PhaseSpaceVector<double> f{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  PhaseSpaceVector<double> g{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
  EXPECT_EQ(kind_of([&] { symplectic_product(st, f, g); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([&] { mu_product(st, f, g); }), ErrorKind::DimensionMismatch);
}

TEST(MuProduct, ScalarGram) {
  auto st = vacuum_state<double>(chain(1, 0.0, 2.0));
  PhaseSpaceVector<double> f{Eigen::VectorXd::Unit(1, 0), Eigen::VectorXd::Zero(1)};
  EXPECT_DOUBLE_EQ(mu_product(st, f, f), 0.25);
}

TEST(PhaseSpace, RandomPairProperties) {
  auto st = vacuum_state<double>(chain(6, 0.4));
  for (unsigned k = 0; k < 100; ++k) {
    auto f = random_vector<double>(6, 2 * k + 1);
    auto g = random_vector<double>(6, 2 * k + 2);
    PhaseSpaceVector<double> i_f = PhaseSpaceVector<double>::from_stacked(st.I_mat * f.stacked());
    PhaseSpaceVector<double> i_g = PhaseSpaceVector<double>::from_stacked(st.I_mat * g.stacked());
    double scale = f.stacked().norm() * g.stacked().norm();
    double mu = mu_product(st, f, g);
    double sigma = symplectic_product(st, f, g);
    EXPECT_NEAR(mu, mu_product(st, g, f), 1e-12 * scale);
    EXPECT_NEAR(symplectic_product(st, f, i_g), mu, 1e-10 * scale);
    EXPECT_NEAR(symplectic_product(st, i_f, i_g), sigma, 1e-12 * scale);
    EXPECT_NEAR(mu_product(st, i_f, i_g), mu, 1e-12 * scale);
    EXPECT_LE(sigma * sigma, mu_product(st, f, f) * mu_product(st, g, g) * (1 + 1e-12));
    EXPECT_NEAR(mu, f.stacked().dot(st.mu_gram * g.stacked()), 1e-12 * scale);
  }
}

TEST(PhaseSpace, StackRoundTrip) {
  auto f = random_vector<double>(5, 3);
  auto g = PhaseSpaceVector<double>::from_stacked(f.stacked());
  EXPECT_EQ(f.f1, g.f1);
  EXPECT_EQ(f.f2, g.f2);
}
