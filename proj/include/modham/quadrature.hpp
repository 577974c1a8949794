#pragma once

#include <cmath>
#include <map>

#include "modham/error.hpp"
#include "modham/numeric.hpp"

namespace modham {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  long max_evaluations = 200000;
  double initial_step = 1.0;
};

struct QuadratureStats {
  double error_estimate = 0.0;
  long evaluations = 0;
  double step = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

// Integral over t in [1, inf) of a matrix-valued F(t) whose entries are sums
// of terms like 1/(1 - t^2 a^2) and a/(t^2 a^2 - 1) with |a| > 1. With
// t = 1 + e^y each term becomes smooth in y, decays like e^{-|y|} at both ends
// and is analytic for |Im y| < pi, however close |a| is to 1. The trapezoidal
// rule on y is then exponentially convergent; steps are halved until two
// levels agree to abs_tol.
template <class T, class F>
Mat<T> integrate_from_one(F&& integrand, const QuadratureOptions& opt, QuadratureStats* stats) {
  using std::exp;
  if (!(opt.abs_tol > 0)) fail(ErrorKind::InvalidParameter, "quadrature tolerance must be > 0");

  long evals = 0;
  auto g = [&](const T& y) -> Mat<T> {
    ++evals;
    if (evals > opt.max_evaluations) {
      fail(ErrorKind::QuadratureNotConverged, "quadrature evaluation cap reached", {});
    }
    T ey = exp(y);
    return ey * integrand(T(1) + ey);
  };
  auto mag = [](const Mat<T>& m) -> double { return to_double(T(m.cwiseAbs().maxCoeff())); };

  const double h0 = opt.initial_step;
  const double tail_tol = opt.abs_tol / 16.0;
  const double tail_factor = h0 / (1.0 - std::exp(-h0));

  Mat<T> centre = g(T(0));
  Mat<T> sum = centre;
  double last_err = 0.0;

  // level-0 extent, walking outwards until two consecutive nodes are negligible
  auto walk = [&](int dir) -> long {
    long k = 0;
    int small = 0;
    while (small < 2) {
      k += dir;
      Mat<T> v = g(T(double(k) * h0));
      sum += v;
      small = (mag(v) * tail_factor < tail_tol) ? small + 1 : 0;
    }
    return k;
  };
  long k_hi = 0, k_lo = 0;
  try {
    k_hi = walk(+1);
    k_lo = walk(-1);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::QuadratureNotConverged)
      fail(ErrorKind::QuadratureNotConverged,
           "quadrature did not reach the integrand tails within the evaluation cap", {});
    throw;
  }

  Mat<T> estimate = T(h0) * sum;
  double h = h0;
  for (int level = 1;; ++level) {
    double hn = h / 2;
    Mat<T> mid = Mat<T>::Zero(estimate.rows(), estimate.cols());
    long count = (k_hi - k_lo) * (1L << (level - 1));
    long remaining = opt.max_evaluations - evals;
    if (count > remaining) {
      fail(ErrorKind::QuadratureNotConverged,
           "quadrature evaluation cap reached before convergence", {last_err});
    }
    for (long j = 0; j < count; ++j) {
      double y = double(k_lo) * h0 + (2.0 * double(j) + 1.0) * hn;
      mid += g(T(y));
    }
    Mat<T> refined = estimate / T(2) + T(hn) * mid;
    last_err = mag(Mat<T>(refined - estimate));
    estimate = std::move(refined);
    h = hn;
    if (last_err <= opt.abs_tol && level >= 2) break;
  }

  if (stats) {
    stats->error_estimate = last_err;
    stats->evaluations = evals;
    stats->step = h;
    stats->y_min = double(k_lo) * h0;
    stats->y_max = double(k_hi) * h0;
  }
  return estimate;
}

}  // namespace modham
