#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace modham {

enum class ErrorKind {
  InvalidParameter,
  ZeroMode,
  Numerical,
  DimensionMismatch,
  IndexOutOfRange,
  SpectrumOutOfDomain,
  NotMuSelfAdjoint,
  NotStandard,
  DecompositionSingular,
  QuadratureNotConverged,
  PositivityViolation,
  ModularDivergence,
  EmptyRegion,
  BranchCutProximity,
  Overflow,
  Domain,
  TruncationNotConverged,
  Schema,
  FileNotFound,
  Io,
};

std::string_view kind_name(ErrorKind kind);

// Single exception type; `values` carries offending eigenvalues, achieved
// errors etc. depending on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<double> values = {})
      : std::runtime_error(message), kind_(kind), values_(std::move(values)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  ErrorKind kind_;
  std::vector<double> values_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              std::vector<double> values = {}) {
  throw Error(kind, message, std::move(values));
}

}  // namespace modham
