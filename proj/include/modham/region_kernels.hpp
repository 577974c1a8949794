#pragma once

#include <optional>
#include <vector>

#include "modham/symplectic_core.hpp"

namespace modham {

template <class T>
struct RestrictedCorrelators {
  Region region;
  Mat<T> X_R;
  Mat<T> P_R;
  int size() const { return static_cast<int>(X_R.rows()); }
};

template <class T>
RestrictedCorrelators<T> restrict_correlators(const GaussianState<T>& state, const Region& region);

// Sym = X^{1/2} P X^{1/2} = W diag(c^2) W^T, c ascending.
template <class T>
struct SymplecticSpectrum {
  Mat<T> x_sqrt;
  Mat<T> x_inv_sqrt;
  Mat<T> W;
  Vec<T> c;
};

template <class T>
SymplecticSpectrum<T> symplectic_spectrum(const RestrictedCorrelators<T>& rc);

// C = sqrt(X_R P_R) = X^{1/2} Sym^{1/2} X^{-1/2}
template <class T>
Mat<T> compute_C(const RestrictedCorrelators<T>& rc);

struct KernelOptions {
  // modes with c - 1/2 <= sing_tol are divergent; unset -> 1e-10 in double,
  // rescaled to the working epsilon otherwise
  std::optional<double> sing_tol;
  // when set, divergent modes are moved to c = 1/2 + clip instead of failing
  std::optional<double> clip;
};

template <class T>
T effective_sing_tol(const KernelOptions& opt);

template <class T>
struct RegionKernels {
  Region region;
  Mat<T> C;
  Mat<T> M;
  Mat<T> N;
  Mat<T> L_block;  // [[0, 2M], [-2N, 0]]
  Vec<T> c_spectrum;
  std::vector<int> clipped_modes;
};

template <class T>
RegionKernels<T> mn_kernels(const RestrictedCorrelators<T>& rc, const KernelOptions& opt = {});

template <class T>
struct GRouteResult {
  Mat<T> L;
  double max_imag_residual = 0.0;
};

// -2 arccot(2 eps G_R + i) evaluated through its block-diagonal square.
template <class T>
GRouteResult<T> lndelta_region_via_G(const RestrictedCorrelators<T>& rc,
                                     const KernelOptions& opt = {});

// Region generator from the block resolvent integral
// [[0, -4 P J], [4 J X, 0]], J = int_1^inf (1 - 4 t^2 X P)^{-1} dt.
template <class T>
QuadratureResult<T> resolvent_quadrature_generator(const RestrictedCorrelators<T>& rc,
                                                   const QuadratureOptions& qopt,
                                                   const KernelOptions& opt = {});

template <class T>
RegionKernels<T> complement_kernels(const GaussianState<T>& state, const Region& region,
                                    const KernelOptions& opt = {});

template <class T>
T entanglement_entropy(const Vec<T>& c_spectrum);

template <class T>
T entanglement_entropy(const RegionKernels<T>& kernels) {
  return entanglement_entropy<T>(kernels.c_spectrum);
}

// E^T op E: the (phi_R, pi_R) block of a 2n x 2n operator
template <class T>
Mat<T> region_block(const Mat<T>& full, const Region& region);

// region block of left * right without forming the product
template <class T>
Mat<T> region_block(const Mat<T>& left, const Mat<T>& right, const Region& region);

}  // namespace modham
