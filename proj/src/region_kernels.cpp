#include "modham/region_kernels.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "modham/error.hpp"

namespace modham {

template <class T>
RestrictedCorrelators<T> restrict_correlators(const GaussianState<T>& state, const Region& region) {
  if (region.n_sites() != state.n_sites)
    fail(ErrorKind::IndexOutOfRange, "region was built for a different lattice size");
  if (region.empty()) fail(ErrorKind::EmptyRegion, "region is empty");
  const auto& s = region.sites();
  const int r = region.size();
  RestrictedCorrelators<T> rc;
  rc.region = region;
  rc.X_R.resize(r, r);
  rc.P_R.resize(r, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      rc.X_R(i, j) = state.X_full(s[i], s[j]);
      rc.P_R(i, j) = state.P_full(s[i], s[j]);
    }

  // spec(X_R P_R) = spec(Sym) >= 1/4
  auto sp = symplectic_spectrum(rc);
  T lo = sp.c(0) * sp.c(0);
  if (lo < T(0.25) - T(1e-10))
    fail(ErrorKind::PositivityViolation, "spectrum of X_R P_R below 1/4", {to_double(lo)});
  return rc;
}

template <class T>
SymplecticSpectrum<T> symplectic_spectrum(const RestrictedCorrelators<T>& rc) {
  using std::sqrt;
  Eigen::SelfAdjointEigenSolver<Mat<T>> ex(rc.X_R);
  if (ex.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigensolver failed on X_R");
  const Vec<T>& xv = ex.eigenvalues();
  if (!(xv(0) > T(0))) fail(ErrorKind::Numerical, "X_R is not positive definite");
  T cond = xv(xv.size() - 1) / xv(0);
  T limit = T(1e12) * T(std::numeric_limits<double>::epsilon()) / working_epsilon<T>();
  if (cond > limit) fail(ErrorKind::Numerical, "X_R condition number too large", {to_double(cond)});

  SymplecticSpectrum<T> sp;
  sp.x_sqrt = spectral_apply<T>(ex.eigenvectors(), xv, [](const T& x) { return sqrt(x); });
  sp.x_inv_sqrt = spectral_apply<T>(ex.eigenvectors(), xv, [](const T& x) { return T(1) / sqrt(x); });
  Mat<T> sym = symmetrized<T>(Mat<T>(sp.x_sqrt * rc.P_R * sp.x_sqrt));
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(sym);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigensolver failed on Sym");
  sp.W = es.eigenvectors();
  sp.c = es.eigenvalues();
  for (Eigen::Index i = 0; i < sp.c.size(); ++i) sp.c(i) = sqrt(std::max(sp.c(i), T(0)));
  return sp;
}

namespace {

template <class T>
Mat<T> function_of_C(const SymplecticSpectrum<T>& sp, const Vec<T>& fc) {
  return sp.x_sqrt * sp.W * fc.asDiagonal() * sp.W.transpose() * sp.x_inv_sqrt;
}

// ln((2c+1)/(2c-1)) / (2c)
template <class T>
T mode_kernel(const T& c) {
  using std::log;
  return log((T(2) * c + T(1)) / (T(2) * c - T(1))) / (T(2) * c);
}

template <class T>
Vec<T> checked_spectrum(const Vec<T>& c, const KernelOptions& opt, std::vector<int>* clipped) {
  T tol = effective_sing_tol<T>(opt);
  Vec<T> out = c;
  std::vector<double> bad;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) - T(0.5) <= tol) {
      if (opt.clip) {
        out(i) = T(0.5) + T(*opt.clip);
        if (clipped) clipped->push_back(static_cast<int>(i));
      } else {
        bad.push_back(to_double(c(i)));
      }
    }
  }
  if (!bad.empty())
    fail(ErrorKind::ModularDivergence,
         std::to_string(bad.size()) + " mode(s) of C within sing_tol of 1/2", bad);
  return out;
}

template <class T>
Mat<T> assemble_generator(const Mat<T>& upper, const Mat<T>& lower) {
  const Eigen::Index r = upper.rows();
  Mat<T> l = Mat<T>::Zero(2 * r, 2 * r);
  l.topRightCorner(r, r) = upper;
  l.bottomLeftCorner(r, r) = lower;
  return l;
}

// M L^{-1} for lower-triangular L
template <class T>
Mat<T> right_solve_lower(const Mat<T>& m, const Mat<T>& l) {
  return l.transpose().template triangularView<Eigen::Upper>().solve(m.transpose()).transpose();
}

}  // namespace

template <class T>
T effective_sing_tol(const KernelOptions& opt) {
  if (opt.sing_tol) return T(*opt.sing_tol);
  return scaled_threshold<T>(1e-10);
}

template <class T>
Mat<T> compute_C(const RestrictedCorrelators<T>& rc) {
  auto sp = symplectic_spectrum(rc);
  return function_of_C(sp, sp.c);
}

template <class T>
RegionKernels<T> mn_kernels(const RestrictedCorrelators<T>& rc, const KernelOptions& opt) {
  auto sp = symplectic_spectrum(rc);
  RegionKernels<T> k;
  k.region = rc.region;
  k.c_spectrum = sp.c;
  Vec<T> c = checked_spectrum(sp.c, opt, &k.clipped_modes);
  k.C = function_of_C(sp, c);
  Vec<T> fc(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) fc(i) = mode_kernel(c(i));
  Mat<T> f = function_of_C(sp, fc);
  k.M = rc.P_R * f;
  k.N = f * rc.X_R;
  k.L_block = assemble_generator<T>(Mat<T>(T(2) * k.M), Mat<T>(T(-2) * k.N));
  return k;
}

template <class T>
GRouteResult<T> lndelta_region_via_G(const RestrictedCorrelators<T>& rc, const KernelOptions& opt) {
  using std::abs;
  using std::log;
  using std::sqrt;
  const Eigen::Index r = rc.size();
  // G_R = [[X, i/2], [-i/2, P]]; Z = 2 eps G_R + i 1
  Mat<T> g_re = Mat<T>::Zero(2 * r, 2 * r), g_im = Mat<T>::Zero(2 * r, 2 * r);
  g_re.topLeftCorner(r, r) = rc.X_R;
  g_re.bottomRightCorner(r, r) = rc.P_R;
  Mat<T> eps = symplectic_matrix<T>(static_cast<int>(r));
  g_im = eps / T(2);
  Mat<T> z_re = T(2) * eps * g_re;
  Mat<T> z_im = T(2) * eps * g_im + Mat<T>::Identity(2 * r, 2 * r);

  GRouteResult<T> out;
  out.max_imag_residual = to_double(T(z_im.cwiseAbs().maxCoeff()));

  Mat<T> z2 = z_re * z_re;  // diag(-4PX, -4XP)

  // g(w) = arccot(sqrt w)/sqrt w on a block w = -4 c^2 of Z^2. The block is
  // b = -4 L (L^T Y L) L^{-1} for a Cholesky factor L of its left factor,
  // so -L^{-1} b L / 4 is symmetric with eigenvalues c^2.
  auto g_of = [&](const Mat<T>& left, const Mat<T>& block) -> Mat<T> {
    Eigen::LLT<Mat<T>> llt(left);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Numerical, "correlator not positive definite");
    Mat<T> l = llt.matrixL();
    Mat<T> s = l.template triangularView<Eigen::Lower>().solve(Mat<T>(block * l)) / T(-4);
    Eigen::SelfAdjointEigenSolver<Mat<T>> es(symmetrized<T>(s));
    Vec<T> c = es.eigenvalues();
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = sqrt(std::max(c(i), T(0)));
    Vec<T> cc = checked_spectrum(c, opt, nullptr);
    Vec<T> gv(cc.size());
    for (Eigen::Index i = 0; i < cc.size(); ++i) gv(i) = -mode_kernel(cc(i)) / T(2);
    Mat<T> inner = l * es.eigenvectors() * gv.asDiagonal() * es.eigenvectors().transpose();
    return right_solve_lower<T>(inner, l);
  };
  Mat<T> g1 = g_of(rc.P_R, z2.topLeftCorner(r, r));      // -4 P X
  Mat<T> g2 = g_of(rc.X_R, z2.bottomRightCorner(r, r));  // -4 X P

  Mat<T> z12 = z_re.topRightCorner(r, r), z21 = z_re.bottomLeftCorner(r, r);
  out.L = assemble_generator<T>(Mat<T>(T(-2) * z12 * g2), Mat<T>(T(-2) * z21 * g1));
  return out;
}

namespace {

// (4 t^2 T - 1)^{-1} for symmetric tridiagonal T (diag a, off b), SPD for t >= 1
// when spec(T) > 1/4. LDL^T then r solves of O(r) each.
template <class T>
Mat<T> tridiagonal_inverse(const Vec<T>& a, const Vec<T>& b, const T& t) {
  const Eigen::Index r = a.size();
  T s = T(4) * t * t;
  Vec<T> d(r), l(r);  // l(i) couples i-1 -> i
  d(0) = s * a(0) - T(1);
  l(0) = T(0);
  for (Eigen::Index i = 1; i < r; ++i) {
    T off = s * b(i - 1);
    l(i) = off / d(i - 1);
    d(i) = s * a(i) - T(1) - l(i) * off;
  }
  Mat<T> inv(r, r);
  Vec<T> y(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) y(i) = T(0);
    y(j) = T(1);
    for (Eigen::Index i = j + 1; i < r; ++i) y(i) = -l(i) * y(i - 1);
    for (Eigen::Index i = j; i < r; ++i) y(i) /= d(i);
    for (Eigen::Index i = r - 2; i >= 0; --i) y(i) -= l(i + 1) * y(i + 1);
    inv.col(j) = y;
  }
  return inv;
}

}  // namespace

template <class T>
QuadratureResult<T> resolvent_quadrature_generator(const RestrictedCorrelators<T>& rc,
                                                   const QuadratureOptions& qopt,
                                                   const KernelOptions& opt) {
  // same divergence contract as the closed-form routes
  (void)checked_spectrum(symplectic_spectrum(rc).c, opt, nullptr);
  const Eigen::Index r = rc.size();

  Eigen::LLT<Mat<T>> llt(rc.X_R);
  if (llt.info() != Eigen::Success) fail(ErrorKind::Numerical, "X_R not positive definite");
  Mat<T> lx = llt.matrixL();
  Mat<T> w = symmetrized<T>(Mat<T>(lx.transpose() * rc.P_R * lx));  // X P = Lx W Lx^{-1}

  Vec<T> diag(r), off(std::max<Eigen::Index>(r - 1, 0));
  Mat<T> q;
  if (r == 1) {
    diag(0) = w(0, 0);
    q = Mat<T>::Identity(1, 1);
  } else {
    Eigen::Tridiagonalization<Mat<T>> tri(w);
    diag = tri.diagonal();
    off = tri.subDiagonal();
    q = tri.matrixQ();
  }

  // (1 - 4 t^2 T)^{-1} = -(4 t^2 T - 1)^{-1}
  auto integrand = [&](const T& t) -> Mat<T> { return -tridiagonal_inverse<T>(diag, off, t); };

  QuadratureResult<T> out;
  Mat<T> jt = integrate_from_one<T>(integrand, qopt, &out.stats);
  Mat<T> j = right_solve_lower<T>(Mat<T>(lx * q * jt * q.transpose()), lx);
  out.value = assemble_generator<T>(Mat<T>(T(-4) * rc.P_R * j), Mat<T>(T(4) * j * rc.X_R));
  return out;
}

template <class T>
RegionKernels<T> complement_kernels(const GaussianState<T>& state, const Region& region,
                                    const KernelOptions& opt) {
  Region comp = region.complement();
  if (comp.empty()) fail(ErrorKind::EmptyRegion, "complement of the region is empty");
  return mn_kernels(restrict_correlators(state, comp), opt);
}

template <class T>
T entanglement_entropy(const Vec<T>& c_spectrum) {
  using std::log;
  T s(0);
  for (Eigen::Index i = 0; i < c_spectrum.size(); ++i) {
    T hi = c_spectrum(i) + T(0.5), lo = c_spectrum(i) - T(0.5);
    s += hi * log(hi);
    if (lo > T(0)) s -= lo * log(lo);
  }
  return s;
}

template <class T>
Mat<T> region_block(const Mat<T>& left, const Mat<T>& right, const Region& region) {
  auto idx = region.phase_space_indices();
  return left(idx, Eigen::all) * right(Eigen::all, idx);
}

template <class T>
Mat<T> region_block(const Mat<T>& full, const Region& region) {
  auto idx = region.phase_space_indices();
  const auto k = static_cast<Eigen::Index>(idx.size());
  Mat<T> out(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) out(i, j) = full(idx[i], idx[j]);
  return out;
}

#define MODHAM_INSTANTIATE(T)                                                                   \
  template RestrictedCorrelators<T> restrict_correlators<T>(const GaussianState<T>&,            \
                                                            const Region&);                     \
  template SymplecticSpectrum<T> symplectic_spectrum<T>(const RestrictedCorrelators<T>&);       \
  template Mat<T> compute_C<T>(const RestrictedCorrelators<T>&);                                \
  template T effective_sing_tol<T>(const KernelOptions&);                                       \
  template RegionKernels<T> mn_kernels<T>(const RestrictedCorrelators<T>&, const KernelOptions&); \
  template GRouteResult<T> lndelta_region_via_G<T>(const RestrictedCorrelators<T>&,             \
                                                   const KernelOptions&);                       \
  template QuadratureResult<T> resolvent_quadrature_generator<T>(                               \
      const RestrictedCorrelators<T>&, const QuadratureOptions&, const KernelOptions&);         \
  template RegionKernels<T> complement_kernels<T>(const GaussianState<T>&, const Region&,       \
                                                  const KernelOptions&);                        \
  template T entanglement_entropy<T>(const Vec<T>&);                                            \
  template Mat<T> region_block<T>(const Mat<T>&, const Region&);                                \
  template Mat<T> region_block<T>(const Mat<T>&, const Mat<T>&, const Region&);

MODHAM_INSTANTIATE(double)
MODHAM_INSTANTIATE(Real)

}  // namespace modham
