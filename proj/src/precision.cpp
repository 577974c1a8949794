#include "modham/precision.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "modham/error.hpp"
#include "modham/region_kernels.hpp"

namespace modham {

namespace {

// -log10(c_min - 1/2) guessed in double by extrapolating log10(c_k - 1/2)
// linearly from the two resolved modes next to the round-off floor down to
// k = 0. The spacing widens towards k = 0, so this undershoots (by up to 2x on
// half chains). 0 when nothing usable comes out.
double estimate_gap_digits(const LatticeModel& model, const Region& region) {
  try {
    auto sp = symplectic_spectrum(restrict_correlators(vacuum_state<double>(model), region));
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index k = 0; k < sp.c.size(); ++k) {
      double g = sp.c(k) - 0.5;
      if (g > 1e-8) pts.emplace_back(static_cast<double>(k), std::log10(g));
    }
    if (pts.empty()) return 0.0;
    if (pts.front().first == 0.0) return -pts.front().second;
    if (pts.size() < 2) return 0.0;
    double slope = pts[1].second - pts[0].second;
    if (!(slope > 0)) return 0.0;
    return -(pts[0].second - slope * pts[0].first);
  } catch (const Error&) {
    return 0.0;
  }
}

}  // namespace

PrecisionPlan plan_precision(const LatticeModel& model, const Region& region,
                             const PrecisionOptions& opt) {
  PrecisionPlan plan;
  plan.digits = opt.min_digits;
  if (region.n_sites() != model.n_sites)
    fail(ErrorKind::IndexOutOfRange, "region was built for a different lattice size");
  if (region.empty() || region.is_full() || 2 * region.size() > region.n_sites()) {
    plan.degenerate = true;
    plan.note = "no finite gap to resolve";
    return plan;
  }
  double guess = estimate_gap_digits(model, region);
  unsigned first = std::max(opt.min_digits, static_cast<unsigned>(std::ceil(2.0 * guess + 30.0)));
  first = std::min(first, opt.max_digits);
  for (unsigned d = first;; d = std::min(2 * d, opt.max_digits)) {
    PrecisionScope scope(d);
    ++plan.passes;
    auto state = vacuum_state<Real>(model);
    auto spec = symplectic_spectrum(restrict_correlators(state, region));
    Real gap = spec.c(0) - Real(0.5);
    // resolved once the gap sits well above the round-off of this pass
    if (gap > Real(0) && log10(gap) > -(static_cast<double>(d) - 25.0)) {
      plan.gap_log10 = to_double(Real(log10(gap)));
      double want = opt.gap_multiplier * -plan.gap_log10 + opt.guard_digits;
      plan.digits = std::max(opt.min_digits, static_cast<unsigned>(std::ceil(want)));
      if (plan.digits > opt.max_digits)
        fail(ErrorKind::Numerical, "required precision exceeds max_digits",
             {static_cast<double>(plan.digits)});
      return plan;
    }
    if (d == opt.max_digits) break;
  }
  fail(ErrorKind::Numerical, "smallest c - 1/2 not resolved at max_digits",
       {static_cast<double>(opt.max_digits)});
}

}  // namespace modham
