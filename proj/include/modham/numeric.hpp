#pragma once

#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/mpfr.hpp>

namespace modham {

// Dynamic-precision MPFR scalar. Precision of new values follows
// PrecisionScope; mixing values created under different scopes is allowed
// but the result keeps the larger precision.
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
inline constexpr bool is_multiprecision_v = !std::is_floating_point_v<T>;

// RAII: sets decimal digits for Real values created on this thread.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits10);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned previous_;
};

unsigned current_digits();

template <class T>
T working_epsilon() {
  return std::numeric_limits<T>::epsilon();
}

// Breakdown thresholds are quoted for double; scale them to the working
// precision so that they keep the same headroom above round-off.
template <class T>
T scaled_threshold(double for_double) {
  if constexpr (std::is_same_v<T, double>) {
    return for_double;
  } else {
    return T(for_double) * working_epsilon<T>() / T(std::numeric_limits<double>::epsilon());
  }
}

template <class T>
double to_double(const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

template <class T>
Eigen::MatrixXd to_double(const Mat<T>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = to_double(m(i, j));
  return out;
}

template <class T>
Mat<T> from_double(const Eigen::MatrixXd& m) {
  Mat<T> out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = T(m(i, j));
  return out;
}

template <class T>
std::vector<double> to_double(const Vec<T>& v) {
  std::vector<double> out(static_cast<size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<size_t>(i)] = to_double(v(i));
  return out;
}

template <class T>
Mat<T> symmetrized(const Mat<T>& a) {
  return (a + a.transpose()) / T(2);
}

template <class T>
Mat<T> antisymmetrized(const Mat<T>& a) {
  return (a - a.transpose()) / T(2);
}

// ||a - b||_F / max(||a||_F, ||b||_F); 0 when both vanish.
template <class T>
T relative_difference(const Mat<T>& a, const Mat<T>& b) {
  T scale = std::max(a.norm(), b.norm());
  if (scale == T(0)) return T(0);
  return (a - b).norm() / scale;
}

// [[0, 1], [-1, 0]] in n-blocks.
template <class T>
Mat<T> symplectic_matrix(int n) {
  Mat<T> e = Mat<T>::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    e(i, n + i) = T(1);
    e(n + i, i) = T(-1);
  }
  return e;
}

// Applies f to the eigenvalues of a symmetric eigendecomposition.
template <class T, class F>
Mat<T> spectral_apply(const Mat<T>& vectors, const Vec<T>& values, F&& f) {
  Vec<T> fv(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) fv(i) = f(values(i));
  return vectors * fv.asDiagonal() * vectors.transpose();
}

}  // namespace modham

// Eigen 3.4 needs infinity()/quiet_NaN() which boost's eigen.hpp (1.74) omits.
namespace Eigen {
template <>
struct NumTraits<modham::Real> : GenericNumTraits<modham::Real> {
  using Self = modham::Real;
  using Real = Self;
  using NonInteger = Self;
  using Literal = Self;
  using Nested = Self;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  static Self epsilon() { return std::numeric_limits<Self>::epsilon(); }
  static Self dummy_precision() { return 1000 * epsilon(); }
  static Self highest() { return (std::numeric_limits<Self>::max)(); }
  static Self lowest() { return std::numeric_limits<Self>::lowest(); }
  static Self infinity() { return std::numeric_limits<Self>::infinity(); }
  static Self quiet_NaN() { return std::numeric_limits<Self>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<Self>::digits10; }
};
}  // namespace Eigen

namespace modham::detail {

// res += alpha * lhs * rhs with one fused multiply-add per term and no
// temporaries; element (i, j) of X sits at x[i * x_row + j * x_col]
void mpfr_gemm(Eigen::Index rows, Eigen::Index cols, Eigen::Index depth, const Real* lhs,
               Eigen::Index lhs_row, Eigen::Index lhs_col, const Real* rhs, Eigen::Index rhs_row,
               Eigen::Index rhs_col, Real* res, Eigen::Index res_row, Eigen::Index res_col,
               const Real& alpha);

}  // namespace modham::detail

// Eigen's blocked kernel allocates an MPFR temporary per multiply-add, which
// made dense products 1.5-3x slower than the plain loop.
namespace Eigen::internal {
template <typename Index, int LhsStorageOrder, bool ConjugateLhs, int RhsStorageOrder,
          bool ConjugateRhs, int ResInnerStride>
struct general_matrix_matrix_product<Index, modham::Real, LhsStorageOrder, ConjugateLhs,
                                     modham::Real, RhsStorageOrder, ConjugateRhs, ColMajor,
                                     ResInnerStride> {
  using Traits = gebp_traits<modham::Real, modham::Real>;
  using ResScalar = modham::Real;
  static void run(Index rows, Index cols, Index depth, const modham::Real* lhs, Index lhs_stride,
                  const modham::Real* rhs, Index rhs_stride, modham::Real* res, Index res_incr,
                  Index res_stride, const modham::Real& alpha,
                  level3_blocking<modham::Real, modham::Real>&, GemmParallelInfo<Index>* = 0) {
    constexpr bool lr = LhsStorageOrder == RowMajor, rr = RhsStorageOrder == RowMajor;
    modham::detail::mpfr_gemm(rows, cols, depth, lhs, lr ? lhs_stride : 1, lr ? 1 : lhs_stride, rhs,
                              rr ? rhs_stride : 1, rr ? 1 : rhs_stride, res, res_incr, res_stride,
                              alpha);
  }
};
}  // namespace Eigen::internal
