#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace finsler {

enum class ErrorCode {
  InvalidArgument,    // violated precondition or incompatible options
  DimensionMismatch,
  InvalidDrift,       // ||omega||_2 >= 1
  DegeneratePair,     // coincident points where a gradient is requested
  InfeasibleTarget,   // e.g. perplexity not below the out-degree
  NonConvergence,
  DisconnectedGraph,
  ParseError,
  NumericalFailure,   // NaN/inf during optimisation, singular systems
  TooLarge,
};

const char* to_string(ErrorCode code) noexcept;

/// Library error. `value()` carries an optional diagnostic number attached by
/// the thrower (best sigma of a failed bisection, a condition estimate, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<double> value = std::nullopt)
      : std::runtime_error(message), code_(code), value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::optional<double> value_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::optional<double> value = std::nullopt) {
  throw Error(code, message, value);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace finsler
