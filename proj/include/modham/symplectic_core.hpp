#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modham/lattice_model.hpp"
#include "modham/quadrature.hpp"

namespace modham {

class Region {
 public:
  Region() = default;
  // sorted internally; duplicates -> InvalidParameter, out of range -> IndexOutOfRange
  static Region from_sites(std::vector<int> sites, int n_sites);
  static Region interval(int start, int length, int n_sites);
  static Region half(int n_sites);  // first floor(n/2) sites
  static Region centered(int length, int n_sites);

  Region complement() const;
  const std::vector<int>& sites() const { return sites_; }
  int size() const { return static_cast<int>(sites_.size()); }
  int n_sites() const { return n_sites_; }
  bool empty() const { return sites_.empty(); }
  bool is_full() const { return size() == n_sites_; }
  // phi indices then pi indices (offset n)
  std::vector<int> phase_space_indices() const;

  bool operator==(const Region&) const = default;

 private:
  std::vector<int> sites_;
  int n_sites_ = 0;
};

template <class T>
struct CuttingProjection {
  Mat<T> diag_mask;
  std::vector<int> indices;  // phase-space indices kept by the mask
};

template <class T>
CuttingProjection<T> cutting_projection(const Region& region, int n_sites);

// 2n x 2r selection matrix E with E^T h = P h restricted to region coordinates.
template <class T>
Mat<T> region_embedding(const Region& region);

template <class T>
struct MuAdjoint {
  Mat<T> matrix;
  double gram_condition = 0.0;
  std::optional<std::string> warning;
};

template <class T>
MuAdjoint<T> mu_adjoint(const GaussianState<T>& state, const Mat<T>& a);

template <class T>
struct SpectralDomain {
  std::function<bool(const T&)> contains;
  std::string description;

  static SpectralDomain whole_line();
  static SpectralDomain outside_unit_interval();  // |x| > 1
  static SpectralDomain positive();
};

// ||Gram A - A^T Gram|| / (||A|| ||Gram||)
template <class T>
T mu_self_adjoint_defect(const GaussianState<T>& state, const Mat<T>& a);

template <class T>
Mat<T> mu_spectral_function(const GaussianState<T>& state, const Mat<T>& a,
                            const std::function<T(const T&)>& f, const SpectralDomain<T>& domain);

// mu-orthonormal basis U of a subspace (U^T Gram U = 1) and its coordinate map
// U^+ = U^T Gram. Operators leaving the subspace invariant are represented by
// U^+ O U, which is symmetric iff O is mu-self-adjoint.
template <class T>
struct MuFrame {
  Mat<T> basis;   // 2n x k
  Mat<T> coords;  // k x 2n
  int dim() const { return static_cast<int>(basis.cols()); }
  Mat<T> restrict(const Mat<T>& op) const { return coords * op * basis; }
  Mat<T> lift(const Mat<T>& op_k) const { return basis * op_k * coords; }
  Mat<T> projector() const { return basis * coords; }
};

template <class T>
MuFrame<T> full_frame(const GaussianState<T>& state);

// mu-orthonormal basis of span(columns); rank deficiency beyond the scaled
// tolerance -> DecompositionSingular.
template <class T>
MuFrame<T> frame_for_span(const GaussianState<T>& state, const Mat<T>& columns);

// A = 1 - P + IPI
template <class T>
Mat<T> projector_operator(const GaussianState<T>& state, const Region& region);

struct StandardnessReport {
  double min_abs_eigenvalue = 0.0;  // over the cyclic subspace L + IL
  bool is_standard = false;
  bool is_separating = false;
  bool is_cyclic = false;  // L + IL is the whole phase space
  std::string reason;
};

template <class T>
StandardnessReport standardness_check(const GaussianState<T>& state, const Region& region);

template <class T>
struct ModularResiduals {
  double exp_log = 0.0;         // ||exp(lnDelta) - Delta|| / ||Delta||
  double reconstruction = 0.0;  // ||-(1+Delta)(1-Delta)^{-1} - A|| / ||A|| on K
  double decomposition = 0.0;   // residual of the h = f + Ig solve
};

// Operators on the cyclic subspace K = L + IL, lifted to 2n x 2n with zero on
// the mu-orthogonal complement of K. For cyclic regions K is everything.
template <class T>
struct ModularData {
  Mat<T> A;  // full 1 - P + IPI
  Mat<T> lnDelta;
  Mat<T> Delta;
  Mat<T> S_op;
  Mat<T> J_op;
  Mat<T> cyclic_projector;
  bool cyclic = false;
  MuFrame<T> frame;
  Vec<T> a_spectrum;  // eigenvalues of A on K, ascending
  ModularResiduals<T> residuals;
};

template <class T>
ModularData<T> modular_data_full(const GaussianState<T>& state, const Region& region);

// lnDelta = 2 arcoth(A) on K only (no Tomita operators)
template <class T>
Mat<T> lndelta_full(const GaussianState<T>& state, const Region& region);

template <class T>
struct QuadratureResult {
  Mat<T> value;
  QuadratureStats stats;
};

// 2 int_1^inf A (t^2 A^2 - 1)^{-1} dt for symmetric A with |spec| > 1.
template <class T>
QuadratureResult<T> arcoth_resolvent_quadrature(const Mat<T>& a_symmetric,
                                                const QuadratureOptions& opt);

// lnDelta by the resolvent integral over the cyclic subspace, lifted.
template <class T>
QuadratureResult<T> lndelta_resolvent_quadrature(const GaussianState<T>& state,
                                                 const Region& region,
                                                 const QuadratureOptions& opt);

// I lnDelta = 2 P arccot(PIP) P - 2 (1-P) arccot((1-P)I(1-P)) (1-P), lifted from K.
template <class T>
Mat<T> lndelta_arccot_split(const GaussianState<T>& state, const Region& region);

}  // namespace modham
