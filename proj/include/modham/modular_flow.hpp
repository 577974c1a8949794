#pragma once

#include <complex>
#include <string>
#include <vector>

#include "modham/region_kernels.hpp"

namespace modham {

template <class T>
struct ComplexMatrix {
  Mat<T> re;
  Mat<T> im;
};

enum class ExpMethod { Auto, Spectral, ScalingSquaring };

std::string_view to_string(ExpMethod m);

struct FlowOptions {
  double generator_tol = 1e-7;
  bool verify_generator = true;
  bool throw_on_branch_cut = true;
  ExpMethod method = ExpMethod::Auto;
};

// L from the two-point function alone: L = i log(G^{-1} G^T), principal log.
template <class T>
struct GeneratorCheck {
  Mat<T> L;
  double imag_residual = 0.0;   // ||Re log(G^{-1}G^T)|| / ||L||
  double eigen_ratio = 0.0;     // lambda_min / lambda_max of G^{-1}G^T (real, positive)
  bool near_branch_cut = false;
};

template <class T>
GeneratorCheck<T> generator_from_two_point(const RestrictedCorrelators<T>& rc);

template <class T>
struct ModularFlow {
  Mat<T> L;
  Region region;
  ComplexMatrix<T> G_R;
  Mat<T> L_check;
  double generator_residual = 0.0;
  std::vector<std::string> warnings;
  ExpMethod method = ExpMethod::Spectral;

  // Gram_R^{1/2} L Gram_R^{-1/2} is antisymmetric; -(that)^2 = W diag(w^2) W^T
  Mat<T> gram_sqrt;
  Mat<T> gram_inv_sqrt;
  Mat<T> L_tilde;
  Mat<T> W;
  Vec<T> w;
  double similarity_condition = 0.0;
};

template <class T>
ModularFlow<T> build_flow(const RegionKernels<T>& kernels, const RestrictedCorrelators<T>& rc,
                          const FlowOptions& opt = {});

// flow for an arbitrary generator (negative controls, precision changes)
template <class T>
ModularFlow<T> make_flow(const Mat<T>& L, const RestrictedCorrelators<T>& rc,
                         const FlowOptions& opt = {});

template <class T>
ComplexMatrix<T> flow_at(const ModularFlow<T>& flow, std::complex<double> t,
                         ExpMethod method = ExpMethod::Auto);

// ||G_R K(t - i) - G_R^T K(t)|| / ||G_R K(t)||
template <class T>
T kms_residual(const ModularFlow<T>& flow, double t);

template <class T>
T group_residual(const ModularFlow<T>& flow, double s, double t,
                 ExpMethod method = ExpMethod::Auto);

template <class T>
T symplectic_invariance_residual(const ModularFlow<T>& flow, double t,
                                 ExpMethod method = ExpMethod::Auto);

struct KmsFailure {
  double t = 0.0;
  std::string kind;
  std::string message;
};

struct KmsReport {
  std::vector<double> t_values;
  std::vector<double> kms_residuals;
  std::vector<double> group_residuals;
  std::vector<double> symplectic_residuals;
  double max_residual = 0.0;
  double generator_residual = 0.0;
  std::string exp_method;
  std::vector<std::string> warnings;
  std::vector<KmsFailure> failures;
};

struct SuiteOptions {
  KernelOptions kernels;
  FlowOptions flow;
  unsigned seed = 7;
};

template <class T>
KmsReport run_kms_suite(const GaussianState<T>& state, const Region& region,
                        const std::vector<double>& t_grid, const SuiteOptions& opt = {});

inline std::vector<double> default_t_grid() { return {-1.0, -0.5, 0.0, 0.5, 1.0}; }

// matrix exponential by scaling and squaring (Pade in double, Taylor otherwise)
template <class T>
Mat<T> expm(const Mat<T>& a);

}  // namespace modham
