#pragma once

#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "modham/lattice_model.hpp"

namespace modham {

// 50 significant digits, independent of the MPFR pipeline scalar
using OracleReal = boost::multiprecision::cpp_bin_float_50;

struct SingleModeOracle {
  OracleReal c;
  OracleReal M;
  OracleReal N;
  OracleReal L[2][2];  // [[0, 2M], [-2N, 0]]
  OracleReal entropy;
};

// closed-form one-mode kernels; Domain if xp < 1/4, ModularDivergence at xp = 1/4
SingleModeOracle oracle_single_mode(const OracleReal& x, const OracleReal& p);

struct FockOracleResult {
  double entropy = 0.0;
  std::vector<double> occupation_spectrum;  // eigenvalues of rho_R, descending
  double trace = 0.0;                       // before renormalization
  double level_ratio = 0.0;                 // lambda_1 / lambda_0
  double c = 0.0;                           // sqrt(X_00 P_00) from the model
  double q = 0.0;                           // (c - 1/2) / (c + 1/2)
  double vacuum_number = 0.0;               // <N_b> of the truncated ground vector
  double entropy_at_n_max_plus_4 = 0.0;
  int n_max = 0;
};

// Two-site vacuum in a truncated occupation basis, reduced to site 0.
FockOracleResult oracle_reduced_density_matrix(const LatticeModel& model_2site, int n_max);

struct ResolventScalarOracle {
  OracleReal integral;     // int_1^inf dt / (1 - 4 t^2 z^2)
  OracleReal closed_form;  // -(1/(4z)) ln((2z+1)/(2z-1))
  double discrepancy = 0.0;
  double error_estimate = 0.0;
};

ResolventScalarOracle oracle_resolvent_scalar(double z, double quad_tol);

}  // namespace modham
