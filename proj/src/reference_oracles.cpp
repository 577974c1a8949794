#include "modham/reference_oracles.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <Eigen/Eigenvalues>

#include "modham/error.hpp"

namespace modham {

SingleModeOracle oracle_single_mode(const OracleReal& x, const OracleReal& p) {
  if (!(x > 0) || !(p > 0)) fail(ErrorKind::Domain, "x and p must be positive");
  OracleReal xp = x * p;
  if (xp < OracleReal(0.25) * (1 - OracleReal("1e-45")))
    fail(ErrorKind::Domain, "xp < 1/4", {xp.convert_to<double>()});
  SingleModeOracle out;
  out.c = sqrt(xp);
  OracleReal gap = out.c - OracleReal(0.5);
  if (gap <= OracleReal("1e-45"))
    fail(ErrorKind::ModularDivergence, "c = 1/2: unentangled mode", {out.c.convert_to<double>()});
  OracleReal k = log((2 * out.c + 1) / (2 * out.c - 1)) / (2 * out.c);
  out.M = p * k;
  out.N = x * k;
  out.L[0][0] = 0;
  out.L[0][1] = 2 * out.M;
  out.L[1][0] = -2 * out.N;
  out.L[1][1] = 0;
  OracleReal hi = out.c + OracleReal(0.5);
  out.entropy = hi * log(hi) - gap * log(gap);
  return out;
}

namespace {

struct FockPass {
  double entropy;
  std::vector<double> spectrum;
  double trace;
  double vacuum_number;
};

FockPass fock_pass(const Eigen::MatrixXd& v, int n_max) {
  const int d = n_max + 1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> nm(v);
  if (nm.eigenvalues()(0) <= 0) fail(ErrorKind::ZeroMode, "dynamical matrix not positive");
  Eigen::Vector2d omega = nm.eigenvalues().cwiseSqrt();
  const Eigen::Matrix2d& o = nm.eigenvectors();
  Eigen::Vector2d w(std::sqrt(v(0, 0)), std::sqrt(v(1, 1)));

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  auto kron = [&](const Eigen::MatrixXd& l, const Eigen::MatrixXd& r) {
    Eigen::MatrixXd out(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = l(i, j) * r;
    return out;
  };
  Eigen::MatrixXd site_a[2] = {kron(a, id), kron(id, a)};

  // b_k = sum_j O_jk (alpha_jk a_j + beta_jk a_j^dagger), all real
  Eigen::MatrixXd nb = Eigen::MatrixXd::Zero(d * d, d * d);
  for (int k = 0; k < 2; ++k) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d * d, d * d);
    for (int j = 0; j < 2; ++j) {
      double r = std::sqrt(omega(k) / w(j));
      double alpha = 0.5 * (r + 1.0 / r);
      double beta = 0.5 * (r - 1.0 / r);
      b += o(j, k) * (alpha * site_a[j] + beta * site_a[j].transpose());
    }
    nb += b.transpose() * b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nb);
  Eigen::VectorXd psi = es.eigenvectors().col(0);

  // psi(i0 * d + i1); rho_0 = Psi Psi^T
  Eigen::MatrixXd big_psi(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) big_psi(i, j) = psi(i * d + j);
  Eigen::MatrixXd rho = big_psi * big_psi.transpose();
  FockPass out;
  out.trace = rho.trace();
  out.vacuum_number = es.eigenvalues()(0);
  rho /= out.trace;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(rho, Eigen::EigenvaluesOnly);
  out.spectrum.assign(rs.eigenvalues().data(), rs.eigenvalues().data() + d);
  std::sort(out.spectrum.rbegin(), out.spectrum.rend());
  out.entropy = 0.0;
  for (double l : out.spectrum)
    if (l > 1e-300) out.entropy -= l * std::log(l);
  return out;
}

}  // namespace

FockOracleResult oracle_reduced_density_matrix(const LatticeModel& model, int n_max) {
  if (model.n_sites != 2) fail(ErrorKind::InvalidParameter, "Fock oracle needs a 2-site model");
  if (n_max < 8) fail(ErrorKind::InvalidParameter, "n_max must be >= 8");
  const Eigen::MatrixXd& v = model.dynamical_matrix;
  FockPass base = fock_pass(v, n_max);
  FockPass more = fock_pass(v, n_max + 4);

  FockOracleResult out;
  out.n_max = n_max;
  out.entropy = base.entropy;
  out.occupation_spectrum = base.spectrum;
  out.trace = base.trace;
  out.vacuum_number = base.vacuum_number;
  out.entropy_at_n_max_plus_4 = more.entropy;
  out.level_ratio = base.spectrum[1] / base.spectrum[0];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
  Eigen::VectorXd sq = es.eigenvalues().cwiseSqrt();
  Eigen::MatrixXd x = 0.5 * es.eigenvectors() * sq.cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose();
  Eigen::MatrixXd p = 0.5 * es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
  out.c = std::sqrt(x(0, 0) * p(0, 0));
  out.q = (out.c - 0.5) / (out.c + 0.5);

  if (std::abs(more.entropy - base.entropy) > 1e-6)
    fail(ErrorKind::TruncationNotConverged, "entropy changed by more than 1e-6 at n_max + 4",
         {base.entropy, more.entropy});
  return out;
}

ResolventScalarOracle oracle_resolvent_scalar(double z, double quad_tol) {
  if (!(z * z >= 0.25 + 1e-8)) fail(ErrorKind::Domain, "z^2 < 1/4 + 1e-8", {z});
  if (!(quad_tol > 0)) fail(ErrorKind::InvalidParameter, "quad_tol must be positive");
  OracleReal zz(z);
  boost::math::quadrature::exp_sinh<OracleReal> integrator;
  auto f = [&](const OracleReal& s) {
    OracleReal t = 1 + s;
    return 1 / (1 - 4 * t * t * zz * zz);
  };
  ResolventScalarOracle out;
  OracleReal err;
  out.integral = integrator.integrate(f, OracleReal("1e-40"), &err);
  out.closed_form = -log((2 * zz + 1) / (2 * zz - 1)) / (4 * zz);
  out.error_estimate = err.convert_to<double>();
  out.discrepancy = abs(out.integral - out.closed_form).convert_to<double>();
  if (out.discrepancy > quad_tol || !(out.error_estimate <= quad_tol))
    fail(ErrorKind::QuadratureNotConverged, "scalar resolvent integral missed quad_tol",
         {out.discrepancy, out.error_estimate});
  return out;
}

}  // namespace modham
