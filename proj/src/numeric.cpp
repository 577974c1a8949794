#include "modham/numeric.hpp"

#include <algorithm>

#include <mpfr.h>

namespace modham {

PrecisionScope::PrecisionScope(unsigned digits10) : previous_(Real::default_precision()) {
  Real::default_precision(digits10);
}

PrecisionScope::~PrecisionScope() { Real::default_precision(previous_); }

unsigned current_digits() { return Real::default_precision(); }

namespace detail {

void mpfr_gemm(Eigen::Index rows, Eigen::Index cols, Eigen::Index depth, const Real* lhs,
               Eigen::Index lhs_row, Eigen::Index lhs_col, const Real* rhs, Eigen::Index rhs_row,
               Eigen::Index rhs_col, Real* res, Eigen::Index res_row, Eigen::Index res_col,
               const Real& alpha) {
  if (rows == 0 || cols == 0 || depth == 0) return;
  mpfr_prec_t prec = std::max(mpfr_get_prec(lhs[0].backend().data()),
                              mpfr_get_prec(rhs[0].backend().data()));
  const bool unit = alpha == 1;
  mpfr_t acc;
  mpfr_init2(acc, prec);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      mpfr_set_zero(acc, 1);
      const Real* a = lhs + i * lhs_row;
      const Real* b = rhs + j * rhs_col;
      for (Eigen::Index k = 0; k < depth; ++k)
        mpfr_fma(acc, a[k * lhs_col].backend().data(), b[k * rhs_row].backend().data(), acc,
                 MPFR_RNDN);
      if (!unit) mpfr_mul(acc, acc, alpha.backend().data(), MPFR_RNDN);
      mpfr_ptr out = res[i * res_row + j * res_col].backend().data();
      mpfr_add(out, out, acc, MPFR_RNDN);
    }
  }
  mpfr_clear(acc);
}

}  // namespace detail

}  // namespace modham
