#include "modham/modular_flow.hpp"

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "modham/error.hpp"

namespace modham {

std::string_view to_string(ExpMethod m) {
  switch (m) {
    case ExpMethod::Auto: return "auto";
    case ExpMethod::Spectral: return "spectral";
    case ExpMethod::ScalingSquaring: return "scaling-squaring";
  }
  return "auto";
}

template <class T>
Mat<T> expm(const Mat<T>& a) {
  if constexpr (std::is_same_v<T, double>) {
    return a.exp();
  } else {
    using std::ceil;
    using std::log2;
    using std::sqrt;
    const Eigen::Index n = a.rows();
    T norm = a.cwiseAbs().colwise().sum().maxCoeff();
    // numeric_limits<T>::digits is not the runtime MPFR precision
    T eps = working_epsilon<T>();
    double bits = -log2(eps).template convert_to<double>();
    int s = static_cast<int>(std::ceil(std::sqrt(bits)));
    if (norm > T(1)) s += static_cast<int>(ceil(log2(norm)).template convert_to<double>());
    Mat<T> x = a / T(std::ldexp(1.0, s));
    Mat<T> sum = Mat<T>::Identity(n, n), term = Mat<T>::Identity(n, n);
    for (int k = 1; k < 10000; ++k) {
      term = term * x / T(k);
      sum += term;
      if (term.cwiseAbs().maxCoeff() <= eps * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
  }
}

namespace {

template <class T>
Mat<T> realify(const Mat<T>& re, const Mat<T>& im) {
  const Eigen::Index n = re.rows(), m = re.cols();
  Mat<T> out(2 * n, 2 * m);
  out << re, -im, im, re;
  return out;
}

template <class T>
ComplexMatrix<T> two_point_function(const RestrictedCorrelators<T>& rc) {
  const int r = rc.size();
  ComplexMatrix<T> g;
  g.re = Mat<T>::Zero(2 * r, 2 * r);
  g.re.topLeftCorner(r, r) = rc.X_R;
  g.re.bottomRightCorner(r, r) = rc.P_R;
  g.im = symplectic_matrix<T>(r) / T(2);
  return g;
}

template <class T>
ComplexMatrix<T> cmul(const ComplexMatrix<T>& a, const ComplexMatrix<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
T cnorm(const ComplexMatrix<T>& a) {
  using std::sqrt;
  return sqrt(a.re.squaredNorm() + a.im.squaredNorm());
}

template <class T>
T cmax(const ComplexMatrix<T>& a) {
  return std::max(a.re.cwiseAbs().maxCoeff(), a.im.cwiseAbs().maxCoeff());
}

}  // namespace

template <class T>
GeneratorCheck<T> generator_from_two_point(const RestrictedCorrelators<T>& rc) {
  using std::log;
  ComplexMatrix<T> g = two_point_function(rc);
  // G^T = conj(G) since G is Hermitian
  Mat<T> gr = realify<T>(g.re, g.im);
  Mat<T> gtr = realify<T>(g.re, Mat<T>(-g.im));
  Eigen::LLT<Mat<T>> llt(symmetrized<T>(gr));
  if (llt.info() != Eigen::Success) fail(ErrorKind::Numerical, "G_R is not positive definite");
  Mat<T> r = llt.matrixL();
  // G^{-1} G^T = R^{-T} H R^T with H = R^{-1} G^T R^{-T} symmetric positive
  auto lower = r.template triangularView<Eigen::Lower>();
  Mat<T> tmp = lower.solve(gtr);
  Mat<T> h = symmetrized<T>(Mat<T>(lower.solve(Mat<T>(tmp.transpose())).transpose()));
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(h);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigensolver failed on G^{-1}G^T");
  const Vec<T>& lam = es.eigenvalues();

  GeneratorCheck<T> out;
  out.eigen_ratio = to_double(T(lam(0) / lam(lam.size() - 1)));
  out.near_branch_cut = !(lam(0) > T(0)) ||
                        lam(0) <= scaled_threshold<T>(1e-8) * lam(lam.size() - 1);
  if (!(lam(0) > T(0))) return out;

  Mat<T> log_h = spectral_apply<T>(es.eigenvectors(), lam, [](const T& x) { return log(x); });
  // log(M) = R^{-T} log(H) R^T
  Mat<T> log_m = r.transpose().template triangularView<Eigen::Upper>().solve(
      Mat<T>(log_h * r.transpose()));
  const Eigen::Index k = rc.size() * 2;
  Mat<T> re = log_m.topLeftCorner(k, k), im = log_m.bottomLeftCorner(k, k);
  out.L = -im;  // i log M = -Im + i Re
  T scale = out.L.norm();
  out.imag_residual = scale == T(0) ? 0.0 : to_double(T(re.norm() / scale));
  return out;
}

template <class T>
ModularFlow<T> make_flow(const Mat<T>& L, const RestrictedCorrelators<T>& rc,
                         const FlowOptions& opt) {
  using std::sqrt;
  const int r = rc.size();
  if (L.rows() != 2 * r || L.cols() != 2 * r)
    fail(ErrorKind::DimensionMismatch, "generator must be 2r x 2r");
  ModularFlow<T> f;
  f.L = L;
  f.region = rc.region;
  f.G_R = two_point_function(rc);

  if (opt.verify_generator) {
    GeneratorCheck<T> chk = generator_from_two_point(rc);
    if (chk.near_branch_cut) {
      std::string msg = "eigenvalue of G^{-1}G^T at relative size " +
                        std::to_string(chk.eigen_ratio) + " is not resolved (principal log cut)";
      if (opt.throw_on_branch_cut) fail(ErrorKind::BranchCutProximity, msg, {chk.eigen_ratio});
      f.warnings.push_back("BranchCutProximity: " + msg);
      f.generator_residual = std::numeric_limits<double>::quiet_NaN();
    } else {
      f.L_check = chk.L;
      f.generator_residual = to_double(relative_difference<T>(L, chk.L));
      if (f.generator_residual > opt.generator_tol)
        fail(ErrorKind::Numerical, "block generator and -i log construction disagree",
             {f.generator_residual});
    }
  }

  // spectral data for exp(z L)
  Eigen::SelfAdjointEigenSolver<Mat<T>> ex(rc.X_R), ep(rc.P_R);
  f.gram_sqrt = Mat<T>::Zero(2 * r, 2 * r);
  f.gram_inv_sqrt = Mat<T>::Zero(2 * r, 2 * r);
  auto sq = [](const T& x) { return sqrt(x); };
  auto isq = [](const T& x) { return T(1) / sqrt(x); };
  f.gram_sqrt.topLeftCorner(r, r) = spectral_apply<T>(ex.eigenvectors(), ex.eigenvalues(), sq);
  f.gram_sqrt.bottomRightCorner(r, r) = spectral_apply<T>(ep.eigenvectors(), ep.eigenvalues(), sq);
  f.gram_inv_sqrt.topLeftCorner(r, r) = spectral_apply<T>(ex.eigenvectors(), ex.eigenvalues(), isq);
  f.gram_inv_sqrt.bottomRightCorner(r, r) =
      spectral_apply<T>(ep.eigenvectors(), ep.eigenvalues(), isq);
  T gmax = std::max(ex.eigenvalues().maxCoeff(), ep.eigenvalues().maxCoeff());
  T gmin = std::min(ex.eigenvalues().minCoeff(), ep.eigenvalues().minCoeff());
  f.similarity_condition = to_double(T(sqrt(gmax / gmin)));

  f.L_tilde = antisymmetrized<T>(Mat<T>(f.gram_sqrt * L * f.gram_inv_sqrt));
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(symmetrized<T>(Mat<T>(-(f.L_tilde * f.L_tilde))));
  f.W = es.eigenvectors();
  f.w = es.eigenvalues();
  for (Eigen::Index i = 0; i < f.w.size(); ++i) f.w(i) = sqrt(std::max(f.w(i), T(0)));

  f.method = opt.method;
  if (f.method == ExpMethod::Auto)
    f.method = f.similarity_condition < 1e8 ? ExpMethod::Spectral : ExpMethod::ScalingSquaring;
  return f;
}

template <class T>
ModularFlow<T> build_flow(const RegionKernels<T>& kernels, const RestrictedCorrelators<T>& rc,
                          const FlowOptions& opt) {
  if (!(kernels.region == rc.region))
    fail(ErrorKind::DimensionMismatch, "kernels and correlators belong to different regions");
  return make_flow(kernels.L_block, rc, opt);
}

namespace {

template <class T>
ComplexMatrix<T> spectral_exp(const ModularFlow<T>& f, std::complex<double> z) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  const Eigen::Index k = f.w.size();
  T a(z.real()), b(z.imag());
  Vec<T> c_re(k), c_im(k), s_re(k), s_im(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const T& w = f.w(i);
    T ca = cos(a * w), sa = sin(a * w), chb = cosh(b * w), shb = sinh(b * w);
    c_re(i) = ca * chb;
    c_im(i) = -sa * shb;
    if (w == T(0)) {
      s_re(i) = a;
      s_im(i) = b;
    } else {
      s_re(i) = sa * chb / w;
      s_im(i) = ca * shb / w;
    }
  }
  auto fn = [&](const Vec<T>& d) -> Mat<T> { return f.W * d.asDiagonal() * f.W.transpose(); };
  Mat<T> e_re = fn(c_re) + f.L_tilde * fn(s_re);
  Mat<T> e_im = fn(c_im) + f.L_tilde * fn(s_im);
  return {f.gram_inv_sqrt * e_re * f.gram_sqrt, f.gram_inv_sqrt * e_im * f.gram_sqrt};
}

}  // namespace

template <class T>
ComplexMatrix<T> flow_at(const ModularFlow<T>& flow, std::complex<double> t, ExpMethod method) {
  if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
    fail(ErrorKind::InvalidParameter, "flow time must be finite");
  if (std::abs(t.imag()) > 2.0)
    fail(ErrorKind::InvalidParameter, "|Im t| > 2 is outside the supported strip");
  if (method == ExpMethod::Auto) {
    // Pade is cheap in double and keeps real-time checks independent of the
    // eigendecomposition used for complex times
    bool pade = std::is_same_v<T, double> && t.imag() == 0.0;
    method = pade ? ExpMethod::ScalingSquaring : flow.method;
  }

  ComplexMatrix<T> k;
  if (method == ExpMethod::Spectral) {
    k = spectral_exp(flow, t);
  } else if (t.imag() == 0.0) {
    k.re = expm<T>(Mat<T>(T(t.real()) * flow.L));
    k.im = Mat<T>::Zero(flow.L.rows(), flow.L.cols());
  } else {
    const Eigen::Index n = flow.L.rows();
    Mat<T> big = expm<T>(realify<T>(Mat<T>(T(t.real()) * flow.L), Mat<T>(T(t.imag()) * flow.L)));
    k.re = big.topLeftCorner(n, n);
    k.im = big.bottomLeftCorner(n, n);
  }
  if (t.imag() == 0.0) k.im.setZero();

  T big = cmax(k);
  if (big > T(0.2) / working_epsilon<T>())
    fail(ErrorKind::Overflow, "flow kernel norm exceeds the representable range",
         {to_double(big)});
  return k;
}

template <class T>
T kms_residual(const ModularFlow<T>& flow, double t) {
  ComplexMatrix<T> kt = flow_at(flow, {t, 0.0});
  ComplexMatrix<T> ks = flow_at(flow, {t, -1.0});
  ComplexMatrix<T> gt{flow.G_R.re, Mat<T>(-flow.G_R.im)};
  ComplexMatrix<T> lhs = cmul(flow.G_R, ks);
  ComplexMatrix<T> rhs = cmul(gt, kt);
  ComplexMatrix<T> scale = cmul(flow.G_R, kt);
  ComplexMatrix<T> diff{lhs.re - rhs.re, lhs.im - rhs.im};
  return cnorm(diff) / cnorm(scale);
}

template <class T>
T group_residual(const ModularFlow<T>& flow, double s, double t, ExpMethod method) {
  Mat<T> kst = flow_at(flow, {s + t, 0.0}, method).re;
  Mat<T> ks = flow_at(flow, {s, 0.0}, method).re;
  Mat<T> kt = flow_at(flow, {t, 0.0}, method).re;
  return (kst - kt * ks).norm() / kst.norm();
}

template <class T>
T symplectic_invariance_residual(const ModularFlow<T>& flow, double t, ExpMethod method) {
  Mat<T> k = flow_at(flow, {t, 0.0}, method).re;
  Mat<T> eps = symplectic_matrix<T>(static_cast<int>(k.rows() / 2));
  return (k.transpose() * eps * k - eps).norm() / eps.norm();
}

template <class T>
KmsReport run_kms_suite(const GaussianState<T>& state, const Region& region,
                        const std::vector<double>& t_grid, const SuiteOptions& opt) {
  KmsReport rep;
  auto rc = restrict_correlators(state, region);
  auto kernels = mn_kernels(rc, opt.kernels);
  FlowOptions fo = opt.flow;
  fo.throw_on_branch_cut = false;
  auto flow = build_flow(kernels, rc, fo);
  rep.warnings = flow.warnings;
  rep.generator_residual = flow.generator_residual;
  rep.exp_method = std::string(to_string(flow.method));
  if (std::is_same_v<T, double>) rep.exp_method += " (complex t), scaling-squaring (real t)";

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> pick(-2.0, 2.0);
  for (double t : t_grid) {
    double s = pick(rng);
    try {
      double kms = to_double(kms_residual(flow, t));
      double grp = to_double(group_residual(flow, s, t));
      double sym = to_double(symplectic_invariance_residual(flow, t));
      rep.t_values.push_back(t);
      rep.kms_residuals.push_back(kms);
      rep.group_residuals.push_back(grp);
      rep.symplectic_residuals.push_back(sym);
      rep.max_residual = std::max({rep.max_residual, kms, grp, sym});
    } catch (const Error& e) {
      rep.failures.push_back({t, std::string(kind_name(e.kind())), e.what()});
    }
  }
  return rep;
}

#define MODHAM_INSTANTIATE(T)                                                                   \
  template Mat<T> expm<T>(const Mat<T>&);                                                       \
  template GeneratorCheck<T> generator_from_two_point<T>(const RestrictedCorrelators<T>&);      \
  template ModularFlow<T> make_flow<T>(const Mat<T>&, const RestrictedCorrelators<T>&,          \
                                       const FlowOptions&);                                     \
  template ModularFlow<T> build_flow<T>(const RegionKernels<T>&,                                \
                                        const RestrictedCorrelators<T>&, const FlowOptions&);   \
  template ComplexMatrix<T> flow_at<T>(const ModularFlow<T>&, std::complex<double>, ExpMethod); \
  template T kms_residual<T>(const ModularFlow<T>&, double);                                    \
  template T group_residual<T>(const ModularFlow<T>&, double, double, ExpMethod);               \
  template T symplectic_invariance_residual<T>(const ModularFlow<T>&, double, ExpMethod);       \
  template KmsReport run_kms_suite<T>(const GaussianState<T>&, const Region&,                   \
                                      const std::vector<double>&, const SuiteOptions&);

MODHAM_INSTANTIATE(double)
MODHAM_INSTANTIATE(Real)

}  // namespace modham
