#pragma once

#include <random>

#include "modham/lattice_model.hpp"
#include "modham/precision.hpp"
#include "modham/symplectic_core.hpp"

namespace modham::testing {

inline LatticeModel chain(int n, double m, double coupling = 1.0,
                          Boundary b = Boundary::Dirichlet) {
  return build_harmonic_chain(n, m, coupling, b);
}

template <class T>
Mat<T> random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat<T> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = T(g(rng));
  return m;
}

template <class T>
PhaseSpaceVector<T> random_vector(int n, unsigned seed) {
  Mat<T> v = random_matrix<T>(2 * n, 1, seed);
  return PhaseSpaceVector<T>::from_stacked(Vec<T>(v.col(0)));
}

inline unsigned digits_for(const LatticeModel& model, const Region& region) {
  return plan_precision(model, region).digits;
}

template <class T>
double rel(const Mat<T>& a, const Mat<T>& b) {
  return to_double(relative_difference<T>(a, b));
}

}  // namespace modham::testing
