#pragma once

#include <stdexcept>
#include <string>

namespace krig {

enum class ErrorKind {
  NotPositiveDefinite,
  DimensionMismatch,
  NoConvergence,
  NonPositiveParameter,
  InvalidArgument,
  DomainError,
  DegenerateData,
  FactorizationFailure,
  ObjectiveNonFinite,
  AllStartsFailed,
  NegativeVariance,
  ZeroBaseline,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure the library reports is an Error carrying a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace krig
