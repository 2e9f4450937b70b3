#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace liveia {

enum class ErrorCode {
  invalid_argument,
  geometry_conflict,
  state_error,
  reflection_obstructed,
  no_fracture,
  undefined_score,
  parse_error,
  validation_error,
  not_found,
  conflict,
  io_error,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::geometry_conflict: return "geometry-conflict";
    case ErrorCode::state_error: return "state-error";
    case ErrorCode::reflection_obstructed: return "reflection-obstructed";
    case ErrorCode::no_fracture: return "no-fracture";
    case ErrorCode::undefined_score: return "undefined-score";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::validation_error: return "validation-error";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

/// Base error for every module. `label()` is the stable machine-readable
/// tag surfaced by the service and CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view label() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

/// Raised for lexical, syntax and semantic problems in scenario documents.
/// `invariant` names the violated rule (e.g. "syntax", "range", "no-overlap").
class ParseError : public Error {
 public:
  ParseError(int line, int column, std::string invariant, const std::string& message)
      : Error(ErrorCode::parse_error, "line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        invariant_(std::move(invariant)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  int line_;
  int column_;
  std::string invariant_;
};

/// Mutation/scenario invariant violation outside of parsing.
class ValidationError : public Error {
 public:
  ValidationError(std::string invariant, const std::string& message)
      : Error(ErrorCode::validation_error, invariant + ": " + message),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace liveia
