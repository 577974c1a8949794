#include "modham/error.hpp"

namespace modham {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ZeroMode: return "ZeroModeError";
    case ErrorKind::Numerical: return "NumericalError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SpectrumOutOfDomain: return "SpectrumOutOfDomain";
    case ErrorKind::NotMuSelfAdjoint: return "NotMuSelfAdjoint";
    case ErrorKind::NotStandard: return "NotStandard";
    case ErrorKind::DecompositionSingular: return "DecompositionSingular";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::ModularDivergence: return "ModularDivergence";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::BranchCutProximity: return "BranchCutProximity";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace modham
