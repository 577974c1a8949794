#include "modham/symplectic_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "modham/error.hpp"

namespace modham {

// ---------------------------------------------------------------- Region

Region Region::from_sites(std::vector<int> sites, int n_sites) {
  if (n_sites < 1) fail(ErrorKind::InvalidParameter, "n_sites must be >= 1");
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
    fail(ErrorKind::InvalidParameter, "duplicate site index in region");
  for (int s : sites)
    if (s < 0 || s >= n_sites)
      fail(ErrorKind::IndexOutOfRange,
           "site " + std::to_string(s) + " outside [0, " + std::to_string(n_sites) + ")");
  Region r;
  r.sites_ = std::move(sites);
  r.n_sites_ = n_sites;
  return r;
}

Region Region::interval(int start, int length, int n_sites) {
  if (length < 0) fail(ErrorKind::InvalidParameter, "negative interval length");
  if (start < 0 || start + length > n_sites)
    fail(ErrorKind::IndexOutOfRange, "interval [" + std::to_string(start) + ", " +
                                         std::to_string(start + length) + ") outside lattice");
  std::vector<int> s(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) s[static_cast<size_t>(i)] = start + i;
  return from_sites(std::move(s), n_sites);
}

Region Region::half(int n_sites) { return interval(0, n_sites / 2, n_sites); }

Region Region::centered(int length, int n_sites) {
  return interval((n_sites - length) / 2, length, n_sites);
}

Region Region::complement() const {
  std::vector<int> out;
  size_t k = 0;
  for (int i = 0; i < n_sites_; ++i) {
    if (k < sites_.size() && sites_[k] == i) {
      ++k;
      continue;
    }
    out.push_back(i);
  }
  Region r;
  r.sites_ = std::move(out);
  r.n_sites_ = n_sites_;
  return r;
}

std::vector<int> Region::phase_space_indices() const {
  std::vector<int> idx(sites_);
  for (int s : sites_) idx.push_back(n_sites_ + s);
  return idx;
}

// ---------------------------------------------------------------- projections

template <class T>
CuttingProjection<T> cutting_projection(const Region& region, int n_sites) {
  if (region.n_sites() != n_sites)
    fail(ErrorKind::IndexOutOfRange, "region was built for a different lattice size");
  CuttingProjection<T> p;
  p.diag_mask = Mat<T>::Zero(2 * n_sites, 2 * n_sites);
  p.indices = region.phase_space_indices();
  for (int i : p.indices) p.diag_mask(i, i) = T(1);
  return p;
}

template <class T>
Mat<T> region_embedding(const Region& region) {
  auto idx = region.phase_space_indices();
  Mat<T> e = Mat<T>::Zero(2 * region.n_sites(), static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) e(idx[k], static_cast<Eigen::Index>(k)) = T(1);
  return e;
}

template <class T>
static void check_square(const GaussianState<T>& state, const Mat<T>& a) {
  if (a.rows() != state.dim() || a.cols() != state.dim())
    fail(ErrorKind::DimensionMismatch, "operator must be 2n x 2n");
}

template <class T>
MuAdjoint<T> mu_adjoint(const GaussianState<T>& state, const Mat<T>& a) {
  check_square(state, a);
  MuAdjoint<T> out;
  out.matrix = state.gram_inverse() * a.transpose() * state.mu_gram;
  out.gram_condition = state.gram_condition();
  if (out.gram_condition > 1e12) {
    std::ostringstream os;
    os << "Gram matrix condition number " << out.gram_condition << " exceeds 1e12";
    out.warning = os.str();
  }
  return out;
}

// ---------------------------------------------------------------- spectral calculus

template <class T>
SpectralDomain<T> SpectralDomain<T>::whole_line() {
  return {[](const T&) { return true; }, "(-inf, inf)"};
}

template <class T>
SpectralDomain<T> SpectralDomain<T>::outside_unit_interval() {
  return {[](const T& x) { return x > T(1) || x < T(-1); }, "|x| > 1"};
}

template <class T>
SpectralDomain<T> SpectralDomain<T>::positive() {
  return {[](const T& x) { return x > T(0); }, "x > 0"};
}

template <class T>
T mu_self_adjoint_defect(const GaussianState<T>& state, const Mat<T>& a) {
  check_square(state, a);
  Mat<T> ga = state.mu_gram * a;
  T scale = a.norm() * state.mu_gram.norm();
  if (scale == T(0)) return T(0);
  return (ga - ga.transpose()).norm() / scale;
}

namespace {

template <class T>
Mat<T> apply_in_frame(const Mat<T>& a_k, const std::function<T(const T&)>& f,
                      const SpectralDomain<T>& domain) {
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(symmetrized<T>(a_k));
  if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "symmetric eigensolver failed");
  std::vector<double> bad;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (!domain.contains(es.eigenvalues()(i))) bad.push_back(to_double(es.eigenvalues()(i)));
  if (!bad.empty())
    fail(ErrorKind::SpectrumOutOfDomain,
         std::to_string(bad.size()) + " eigenvalue(s) outside " + domain.description, bad);
  return spectral_apply<T>(es.eigenvectors(), es.eigenvalues(), f);
}

template <class T>
T arcoth(const T& x) {
  using std::log;
  return log((x + T(1)) / (x - T(1))) / T(2);
}

}  // namespace

template <class T>
MuFrame<T> full_frame(const GaussianState<T>& state) {
  MuFrame<T> fr;
  fr.basis = state.gram_inv_sqrt();
  fr.coords = state.gram_sqrt();
  return fr;
}

template <class T>
MuFrame<T> frame_for_span(const GaussianState<T>& state, const Mat<T>& columns) {
  using std::abs;
  Mat<T> gs = state.gram_sqrt();
  Mat<T> y = gs * columns;
  Eigen::ColPivHouseholderQR<Mat<T>> qr(y);
  const Eigen::Index k = columns.cols();
  const auto& r = qr.matrixR();
  T lead = abs(r(0, 0));
  T tol = scaled_threshold<T>(1e-10);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (abs(r(i, i)) <= tol * lead)
      fail(ErrorKind::DecompositionSingular, "spanning set is rank deficient",
           {to_double(T(abs(r(i, i)) / lead))});
  }
  Mat<T> q = qr.householderQ() * Mat<T>::Identity(y.rows(), k);
  MuFrame<T> fr;
  fr.basis = state.gram_inv_sqrt() * q;
  fr.coords = q.transpose() * gs;
  return fr;
}

template <class T>
Mat<T> mu_spectral_function(const GaussianState<T>& state, const Mat<T>& a,
                            const std::function<T(const T&)>& f, const SpectralDomain<T>& domain) {
  check_square(state, a);
  T defect = mu_self_adjoint_defect(state, a);
  if (defect > T(1e-8))
    fail(ErrorKind::NotMuSelfAdjoint, "operator is not mu-self-adjoint", {to_double(defect)});
  MuFrame<T> fr = full_frame(state);
  return fr.lift(apply_in_frame<T>(fr.restrict(a), f, domain));
}

template <class T>
Mat<T> projector_operator(const GaussianState<T>& state, const Region& region) {
  CuttingProjection<T> cp = cutting_projection<T>(region, state.n_sites);
  const Mat<T>& i = state.I_mat;
  // I P I only touches the kept columns and rows
  Mat<T> ipi = i(Eigen::all, cp.indices) * i(cp.indices, Eigen::all);
  return Mat<T>(Mat<T>::Identity(state.dim(), state.dim()) - cp.diag_mask + ipi);
}

namespace {

template <class T>
Mat<T> cyclic_spanning_set(const GaussianState<T>& state, const Region& region) {
  Mat<T> e = region_embedding<T>(region);
  Mat<T> out(state.dim(), 2 * e.cols());
  out << e, state.I_mat * e;
  return out;
}

struct Cyclic {
  bool ok = false;
  std::string reason;
};

Cyclic structural_check(const Region& region) {
  if (region.empty()) return {false, "region is empty"};
  if (region.is_full()) return {false, "region is the whole lattice (Delta = 1)"};
  if (2 * region.size() > region.n_sites())
    return {false, "region larger than its complement: L + IL is not separating"};
  return {true, ""};
}

}  // namespace

namespace {

template <class T>
struct CyclicAnalysis {
  StandardnessReport report;
  MuFrame<T> frame;
  Mat<T> a_k;
  Eigen::SelfAdjointEigenSolver<Mat<T>> es;
};

// frame of K = L + IL, A restricted to it, and its spectrum (once)
template <class T>
CyclicAnalysis<T> analyze(const GaussianState<T>& state, const Region& region, bool vectors) {
  CyclicAnalysis<T> an;
  StandardnessReport& rep = an.report;
  if (region.n_sites() != state.n_sites) {
    rep.reason = "region built for a different lattice";
    return an;
  }
  auto pre = structural_check(region);
  if (!pre.ok) {
    rep.reason = pre.reason;
    return an;
  }
  try {
    an.frame = frame_for_span(state, cyclic_spanning_set(state, region));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DecompositionSingular) throw;
    rep.reason = "L and IL are numerically not independent";
    return an;
  }
  rep.is_separating = true;
  rep.is_cyclic = an.frame.dim() == state.dim();
  an.a_k = symmetrized<T>(an.frame.restrict(projector_operator(state, region)));
  an.es.compute(an.a_k, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (an.es.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigensolver failed on A");
  using std::abs;
  const Vec<T>& ev = an.es.eigenvalues();
  T lo = abs(ev(0));
  for (Eigen::Index i = 1; i < ev.size(); ++i) lo = std::min(lo, T(abs(ev(i))));
  rep.min_abs_eigenvalue = to_double(lo);
  rep.is_standard = rep.min_abs_eigenvalue >= 1.0 - 1e-9;
  if (!rep.is_standard) rep.reason = "spectrum of 1 - P + IPI enters (-1, 1)";
  return an;
}

template <class T>
CyclicAnalysis<T> standard_analysis(const GaussianState<T>& state, const Region& region,
                                    bool vectors) {
  CyclicAnalysis<T> an = analyze(state, region, vectors);
  if (!an.report.is_standard)
    fail(ErrorKind::NotStandard, "region is not standard: " + an.report.reason);
  for (Eigen::Index i = 0; i < an.es.eigenvalues().size(); ++i) {
    const T& l = an.es.eigenvalues()(i);
    if (!(l > T(1) || l < T(-1)))
      fail(ErrorKind::SpectrumOutOfDomain, "eigenvalue of A inside [-1, 1]", {to_double(l)});
  }
  return an;
}

template <class T>
Mat<T> ln_delta_in_frame(const CyclicAnalysis<T>& an) {
  return spectral_apply<T>(an.es.eigenvectors(), an.es.eigenvalues(),
                           [](const T& x) { return T(2) * arcoth(x); });
}

}  // namespace

template <class T>
StandardnessReport standardness_check(const GaussianState<T>& state, const Region& region) {
  return analyze(state, region, false).report;
}

template <class T>
Mat<T> lndelta_full(const GaussianState<T>& state, const Region& region) {
  CyclicAnalysis<T> an = standard_analysis(state, region, true);
  return an.frame.lift(ln_delta_in_frame(an));
}

template <class T>
ModularData<T> modular_data_full(const GaussianState<T>& state, const Region& region) {
  CyclicAnalysis<T> an = standard_analysis(state, region, true);
  const MuFrame<T>& fr = an.frame;
  const Eigen::Index k = fr.dim();
  const Mat<T> one = Mat<T>::Identity(k, k);
  const Mat<T>& a_k = an.a_k;

  ModularData<T> md;
  md.A = projector_operator(state, region);
  md.frame = fr;
  md.cyclic = k == state.dim();
  md.cyclic_projector = fr.projector();
  md.a_spectrum = an.es.eigenvalues();
  Mat<T> ln_k = ln_delta_in_frame(an);

  Eigen::PartialPivLU<Mat<T>> lu_minus(a_k - one);
  Mat<T> delta_k = lu_minus.solve(Mat<T>(a_k + one));

  using std::exp;
  using std::sqrt;
  Mat<T> exp_ln = apply_in_frame<T>(ln_k, [](const T& x) { return exp(x); },
                                    SpectralDomain<T>::whole_line());
  md.residuals.exp_log = to_double(T((exp_ln - delta_k).norm() / delta_k.norm()));

  // Delta^{-1/2} from the spectrum of A: ((a - 1)/(a + 1))^{1/2}
  Mat<T> delta_inv_sqrt = spectral_apply<T>(an.es.eigenvectors(), an.es.eigenvalues(),
                                            [](const T& a) { return sqrt((a - T(1)) / (a + T(1))); });

  // reconstruction -(1 + Delta)(1 - Delta)^{-1} = A
  {
    Eigen::PartialPivLU<Mat<T>> lu(Mat<T>((one - delta_k).transpose()));
    Mat<T> rec = lu.solve(Mat<T>(-(one + delta_k).transpose())).transpose();
    md.residuals.reconstruction = to_double(T((rec - a_k).norm() / a_k.norm()));
  }

  // S(f + Ig) = f - Ig: in coordinates of [E | IE] S is diag(1, -1)
  Mat<T> c_k = fr.coords * cyclic_spanning_set(state, region);
  Vec<T> d(k);
  for (Eigen::Index i = 0; i < k; ++i) d(i) = i < k / 2 ? T(1) : T(-1);
  Mat<T> rhs = d.asDiagonal() * c_k.transpose();
  Eigen::ColPivHouseholderQR<Mat<T>> qr(Mat<T>(c_k.transpose()));
  {
    using std::abs;
    const auto& r = qr.matrixR();
    T lead = abs(r(0, 0));
    for (Eigen::Index i = 0; i < k; ++i)
      if (abs(r(i, i)) <= scaled_threshold<T>(1e-10) * lead)
        fail(ErrorKind::DecompositionSingular, "[P | IP] decomposition is rank deficient");
  }
  Mat<T> s_k = qr.solve(rhs).transpose();
  md.residuals.decomposition =
      to_double(T((c_k.transpose() * s_k.transpose() - rhs).norm() / rhs.norm()));
  Mat<T> j_k = s_k * delta_inv_sqrt;

  md.lnDelta = fr.lift(ln_k);
  md.Delta = fr.lift(delta_k);
  md.S_op = fr.lift(s_k);
  md.J_op = fr.lift(j_k);
  return md;
}

// ---------------------------------------------------------------- quadrature route

template <class T>
QuadratureResult<T> arcoth_resolvent_quadrature(const Mat<T>& a, const QuadratureOptions& opt) {
  if (a.rows() != a.cols()) fail(ErrorKind::DimensionMismatch, "operator must be square");
  const Mat<T> a2 = a * a;
  const Eigen::Index k = a.rows();
  auto integrand = [&](const T& t) -> Mat<T> {
    Mat<T> m = t * t * a2 - Mat<T>::Identity(k, k);
    Eigen::LLT<Mat<T>> llt(m);
    if (llt.info() != Eigen::Success)
      fail(ErrorKind::SpectrumOutOfDomain, "t^2 A^2 - 1 not positive definite (|spec A| <= 1)");
    return llt.solve(a);
  };
  QuadratureResult<T> out;
  out.value = T(2) * integrate_from_one<T>(integrand, opt, &out.stats);
  return out;
}

template <class T>
QuadratureResult<T> lndelta_resolvent_quadrature(const GaussianState<T>& state,
                                                 const Region& region,
                                                 const QuadratureOptions& opt) {
  CyclicAnalysis<T> an = standard_analysis(state, region, false);
  QuadratureResult<T> out = arcoth_resolvent_quadrature<T>(an.a_k, opt);
  out.value = an.frame.lift(out.value);
  return out;
}

// ---------------------------------------------------------------- arccot split

namespace {

// arccot of a real antisymmetric Z with spectrum +-i kappa, kappa > 1:
// arccot(Z) = Z g(Z^2), g(-kappa^2) = -artanh(1/kappa)/kappa.
template <class T>
Mat<T> arccot_antisymmetric(const Mat<T>& z) {
  using std::log;
  using std::sqrt;
  Mat<T> z2 = symmetrized<T>(Mat<T>(z * z));
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(z2);
  std::vector<double> bad;
  for (Eigen::Index i = 0; i < z2.rows(); ++i)
    if (!(es.eigenvalues()(i) < T(-1))) bad.push_back(to_double(es.eigenvalues()(i)));
  if (!bad.empty())
    fail(ErrorKind::SpectrumOutOfDomain, "arccot argument has |spectrum| <= 1", bad);
  Mat<T> g = spectral_apply<T>(es.eigenvectors(), es.eigenvalues(), [](const T& nu) {
    T kappa = sqrt(-nu);
    return -log((kappa + T(1)) / (kappa - T(1))) / (T(2) * kappa);
  });
  return z * g;
}

// 2 Pi arccot(Pi I Pi) Pi for a mask Pi, on the span of `columns` (inside im Pi)
template <class T>
Mat<T> arccot_term(const GaussianState<T>& state, const Mat<T>& mask, const Mat<T>& columns) {
  MuFrame<T> fr = frame_for_span(state, columns);
  Mat<T> z = antisymmetrized<T>(fr.restrict(Mat<T>(mask * state.I_mat * mask)));
  return T(2) * fr.basis * arccot_antisymmetric<T>(z) * fr.coords * mask;
}

}  // namespace

template <class T>
Mat<T> lndelta_arccot_split(const GaussianState<T>& state, const Region& region) {
  (void)standard_analysis(state, region, false);
  Mat<T> p = cutting_projection<T>(region, state.n_sites).diag_mask;
  Mat<T> q = Mat<T>::Identity(state.dim(), state.dim()) - p;
  Mat<T> e = region_embedding<T>(region);
  Mat<T> qie = q * state.I_mat * e;  // spans K intersected with im(1 - P)
  return arccot_term<T>(state, p, e) - arccot_term<T>(state, q, qie);
}

#define MODHAM_INSTANTIATE(T)                                                                   \
  template struct CuttingProjection<T>;                                                         \
  template CuttingProjection<T> cutting_projection<T>(const Region&, int);                      \
  template Mat<T> region_embedding<T>(const Region&);                                           \
  template MuAdjoint<T> mu_adjoint<T>(const GaussianState<T>&, const Mat<T>&);                  \
  template struct SpectralDomain<T>;                                                            \
  template T mu_self_adjoint_defect<T>(const GaussianState<T>&, const Mat<T>&);                 \
  template Mat<T> mu_spectral_function<T>(const GaussianState<T>&, const Mat<T>&,               \
                                          const std::function<T(const T&)>&,                    \
                                          const SpectralDomain<T>&);                            \
  template MuFrame<T> full_frame<T>(const GaussianState<T>&);                                   \
  template MuFrame<T> frame_for_span<T>(const GaussianState<T>&, const Mat<T>&);                \
  template Mat<T> projector_operator<T>(const GaussianState<T>&, const Region&);                \
  template StandardnessReport standardness_check<T>(const GaussianState<T>&, const Region&);    \
  template ModularData<T> modular_data_full<T>(const GaussianState<T>&, const Region&);         \
  template Mat<T> lndelta_full<T>(const GaussianState<T>&, const Region&);                      \
  template QuadratureResult<T> arcoth_resolvent_quadrature<T>(const Mat<T>&,                    \
                                                              const QuadratureOptions&);        \
  template QuadratureResult<T> lndelta_resolvent_quadrature<T>(                                 \
      const GaussianState<T>&, const Region&, const QuadratureOptions&);                        \
  template Mat<T> lndelta_arccot_split<T>(const GaussianState<T>&, const Region&);

MODHAM_INSTANTIATE(double)
MODHAM_INSTANTIATE(Real)

}  // namespace modham
