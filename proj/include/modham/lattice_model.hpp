#pragma once

#include <string>
#include <string_view>

#include "modham/numeric.hpp"

namespace modham {

enum class Boundary { Dirichlet, Periodic };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view text);

struct LatticeModel {
  int n_sites = 0;
  double mass = 0.0;
  double coupling = 0.0;
  Boundary boundary = Boundary::Dirichlet;
  Eigen::MatrixXd dynamical_matrix;  // V = m^2 + coupling * Laplacian

  // V rebuilt from the parameters in T (m^2 formed in T, not rounded in double).
  template <class T>
  Mat<T> dynamical_matrix_as() const;
};

LatticeModel build_harmonic_chain(int n_sites, double mass, double coupling, Boundary boundary);

// Initial data (f1, f2) = (field, momentum).
template <class T>
struct PhaseSpaceVector {
  Vec<T> f1;
  Vec<T> f2;

  Vec<T> stacked() const {
    Vec<T> v(f1.size() + f2.size());
    v << f1, f2;
    return v;
  }
  static PhaseSpaceVector from_stacked(const Vec<T>& v);
};

// Pure quasifree vacuum: X = V^{-1/2}/2, P = V^{1/2}/2.
template <class T>
struct GaussianState {
  int n_sites = 0;
  Mat<T> X_full;
  Mat<T> P_full;
  Mat<T> I_mat;     // [[0, -2P], [2X, 0]]
  Mat<T> epsilon;   // [[0, 1], [-1, 0]]
  Mat<T> mu_gram;   // epsilon * I / 2 = diag(X, P)

  // eigendecomposition of V, kept for Gram^{+-1/2}
  Vec<T> omega;     // sqrt of V eigenvalues
  Mat<T> modes;

  int dim() const { return 2 * n_sites; }
  Mat<T> gram_sqrt() const;
  Mat<T> gram_inv_sqrt() const;
  Mat<T> gram_inverse() const;
  double gram_condition() const;
};

template <class T>
GaussianState<T> vacuum_state(const LatticeModel& model);

template <class T>
T symplectic_product(const GaussianState<T>& state, const PhaseSpaceVector<T>& f,
                     const PhaseSpaceVector<T>& g);

template <class T>
T mu_product(const GaussianState<T>& state, const PhaseSpaceVector<T>& f,
             const PhaseSpaceVector<T>& g);

}  // namespace modham
