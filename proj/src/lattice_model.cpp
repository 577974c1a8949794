#include "modham/lattice_model.hpp"

#include <cmath>

#include "modham/error.hpp"

namespace modham {

namespace {

constexpr double kZeroModeThreshold = 1e-14;

template <class T>
Mat<T> laplacian(int n, Boundary b) {
  Mat<T> lap = Mat<T>::Zero(n, n);
  auto bond = [&](int i, int j) {
    lap(i, i) += T(1);
    lap(j, j) += T(1);
    lap(i, j) -= T(1);
    lap(j, i) -= T(1);
  };
  if (b == Boundary::Dirichlet) {
    // fixed walls at -1 and n
    for (int i = 0; i < n; ++i) lap(i, i) += T(2);
    for (int i = 0; i + 1 < n; ++i) {
      lap(i, i + 1) -= T(1);
      lap(i + 1, i) -= T(1);
    }
  } else {
    for (int i = 0; i < n; ++i) bond(i, (i + 1) % n);
  }
  return lap;
}

}  // namespace

std::string_view to_string(Boundary b) {
  return b == Boundary::Dirichlet ? "dirichlet" : "periodic";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "dirichlet" || text == "Dirichlet") return Boundary::Dirichlet;
  if (text == "periodic" || text == "Periodic") return Boundary::Periodic;
  fail(ErrorKind::InvalidParameter, "unknown boundary '" + std::string(text) + "'");
}

template <class T>
Mat<T> LatticeModel::dynamical_matrix_as() const {
  T m(mass);
  Mat<T> v = T(coupling) * laplacian<T>(n_sites, boundary);
  for (int i = 0; i < n_sites; ++i) v(i, i) += m * m;
  return v;
}

LatticeModel build_harmonic_chain(int n_sites, double mass, double coupling, Boundary boundary) {
  if (n_sites < 1) fail(ErrorKind::InvalidParameter, "n_sites must be >= 1");
  if (!std::isfinite(coupling) || coupling <= 0.0)
    fail(ErrorKind::InvalidParameter, "coupling must be positive");
  if (!std::isfinite(mass) || mass < 0.0) fail(ErrorKind::InvalidParameter, "mass must be >= 0");

  LatticeModel model;
  model.n_sites = n_sites;
  model.mass = mass;
  model.coupling = coupling;
  model.boundary = boundary;
  model.dynamical_matrix = model.dynamical_matrix_as<double>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.dynamical_matrix,
                                                    Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues()(0);
  if (lo < kZeroModeThreshold)
    fail(ErrorKind::ZeroMode, "dynamical matrix has a zero mode", {lo});
  return model;
}

template <class T>
PhaseSpaceVector<T> PhaseSpaceVector<T>::from_stacked(const Vec<T>& v) {
  if (v.size() % 2 != 0) fail(ErrorKind::DimensionMismatch, "odd phase-space dimension");
  Eigen::Index n = v.size() / 2;
  return {v.head(n), v.tail(n)};
}

template <class T>
GaussianState<T> vacuum_state(const LatticeModel& model) {
  const int n = model.n_sites;
  Mat<T> v = model.dynamical_matrix_as<T>();
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(v);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigendecomposition of V failed");
  if (es.eigenvalues()(0) < T(kZeroModeThreshold))
    fail(ErrorKind::ZeroMode, "dynamical matrix has a zero mode",
         {to_double(es.eigenvalues()(0))});

  GaussianState<T> s;
  s.n_sites = n;
  s.modes = es.eigenvectors();
  s.omega = es.eigenvalues().cwiseSqrt();

  using std::sqrt;
  s.X_full = spectral_apply<T>(s.modes, s.omega, [](const T& w) { return T(1) / (T(2) * w); });
  s.P_full = spectral_apply<T>(s.modes, s.omega, [](const T& w) { return w / T(2); });
  s.X_full = symmetrized<T>(s.X_full);
  s.P_full = symmetrized<T>(s.P_full);

  s.epsilon = symplectic_matrix<T>(n);
  Mat<T> diag_xp = Mat<T>::Zero(2 * n, 2 * n);
  diag_xp.topLeftCorner(n, n) = s.X_full;
  diag_xp.bottomRightCorner(n, n) = s.P_full;
  s.I_mat = T(-2) * s.epsilon * diag_xp;
  s.mu_gram = s.epsilon * s.I_mat / T(2);
  return s;
}

template <class T>
Mat<T> GaussianState<T>::gram_sqrt() const {
  using std::sqrt;
  const int n = n_sites;
  Mat<T> g = Mat<T>::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) =
      spectral_apply<T>(modes, omega, [](const T& w) { return T(1) / sqrt(T(2) * w); });
  g.bottomRightCorner(n, n) =
      spectral_apply<T>(modes, omega, [](const T& w) { return sqrt(w / T(2)); });
  return g;
}

template <class T>
Mat<T> GaussianState<T>::gram_inv_sqrt() const {
  using std::sqrt;
  const int n = n_sites;
  Mat<T> g = Mat<T>::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) = spectral_apply<T>(modes, omega, [](const T& w) { return sqrt(T(2) * w); });
  g.bottomRightCorner(n, n) =
      spectral_apply<T>(modes, omega, [](const T& w) { return sqrt(T(2) / w); });
  return g;
}

template <class T>
Mat<T> GaussianState<T>::gram_inverse() const {
  const int n = n_sites;
  Mat<T> g = Mat<T>::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) = spectral_apply<T>(modes, omega, [](const T& w) { return T(2) * w; });
  g.bottomRightCorner(n, n) = spectral_apply<T>(modes, omega, [](const T& w) { return T(2) / w; });
  return g;
}

template <class T>
double GaussianState<T>::gram_condition() const {
  // Gram spectrum is {1/(2w)} U {w/2}
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    double w = to_double(omega(i));
    for (double g : {0.5 / w, 0.5 * w}) {
      hi = std::max(hi, g);
      lo = std::min(lo, g);
    }
  }
  return hi / lo;
}

template <class T>
static void check_dims(const GaussianState<T>& state, const PhaseSpaceVector<T>& f,
                       const PhaseSpaceVector<T>& g) {
  auto n = static_cast<Eigen::Index>(state.n_sites);
  if (f.f1.size() != n || f.f2.size() != n || g.f1.size() != n || g.f2.size() != n)
    fail(ErrorKind::DimensionMismatch, "phase-space vector dimension does not match lattice");
}

template <class T>
T symplectic_product(const GaussianState<T>& state, const PhaseSpaceVector<T>& f,
                     const PhaseSpaceVector<T>& g) {
  check_dims(state, f, g);
  return (f.f1.dot(g.f2) - g.f1.dot(f.f2)) / T(2);
}

template <class T>
T mu_product(const GaussianState<T>& state, const PhaseSpaceVector<T>& f,
             const PhaseSpaceVector<T>& g) {
  check_dims(state, f, g);
  Vec<T> a = f.stacked(), b = g.stacked();
  return a.dot(state.epsilon * (state.I_mat * b)) / T(2);
}

#define MODHAM_INSTANTIATE(T)                                                                \
  template Mat<T> LatticeModel::dynamical_matrix_as<T>() const;                              \
  template struct PhaseSpaceVector<T>;                                                       \
  template struct GaussianState<T>;                                                          \
  template GaussianState<T> vacuum_state<T>(const LatticeModel&);                            \
  template T symplectic_product<T>(const GaussianState<T>&, const PhaseSpaceVector<T>&,      \
                                   const PhaseSpaceVector<T>&);                              \
  template T mu_product<T>(const GaussianState<T>&, const PhaseSpaceVector<T>&,              \
                           const PhaseSpaceVector<T>&);

MODHAM_INSTANTIATE(double)
MODHAM_INSTANTIATE(Real)

}  // namespace modham
