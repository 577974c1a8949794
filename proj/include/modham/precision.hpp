#pragma once

#include <string>

#include "modham/lattice_model.hpp"
#include "modham/symplectic_core.hpp"

namespace modham {

struct PrecisionOptions {
  unsigned min_digits = 40;
  unsigned max_digits = 2400;
  double guard_digits = 40.0;  // digits = gap_multiplier * D + guard
  // 2 for anything built on G^{-1}G^T or the KMS continuation (its spectrum
  // spans (c-1/2)^{+-1}); 1 is enough to compare the spectral, M-N and
  // resolvent routes, which only need c - 1/2 itself resolved
  double gap_multiplier = 2.0;
};

struct PrecisionPlan {
  unsigned digits = 0;
  double gap_log10 = 0.0;  // log10(min c - 1/2) over the region
  int passes = 0;
  bool degenerate = false;  // empty, full, or larger than its complement
  std::string note;
};

// Smallest c - 1/2 decides how many digits the pipeline needs. A double pass
// extrapolates the unresolved tail of the c spectrum to pick the first
// multiprecision pass; passes double until the gap is resolved.
PrecisionPlan plan_precision(const LatticeModel& model, const Region& region,
                             const PrecisionOptions& opt = {});

}  // namespace modham
