#include "krig/error.hpp"

namespace krig {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::ObjectiveNonFinite: return "ObjectiveNonFinite";
    case ErrorKind::AllStartsFailed: return "AllStartsFailed";
    case ErrorKind::NegativeVariance: return "NegativeVariance";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace krig
