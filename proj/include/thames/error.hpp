#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thames {

enum class ErrorKind {
  InvalidInput,
  NotPositiveDefinite,
  Overflow,
  NumericalFailure,
  InsufficientData,
  EmptyTruncationSet,
  ZeroSupportOverlap,
  DegenerateTerm,
  ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::EmptyTruncationSet: return "EmptyTruncationSet";
    case ErrorKind::ZeroSupportOverlap: return "ZeroSupportOverlap";
    case ErrorKind::DegenerateTerm: return "DegenerateTerm";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by scv_normal when the final exponentiation would overflow; the
/// log-scale value is still available.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, double log_value)
      : Error(ErrorKind::Overflow, what), log_value_(log_value) {}

  double log_value() const noexcept { return log_value_; }

 private:
  double log_value_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace thames
