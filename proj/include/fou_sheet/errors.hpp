#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fou {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteInput : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain where the requested evaluation is valid.
class RangeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Cholesky failed even after one jittered retry.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class MaxIterExceeded : public Error {
 public:
  using Error::Error;
};

/// The integral of X^2 vanished, so the estimator ratio is undefined.
class DenominatorZero : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Carries every violated invariant, not only the first one found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration:";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }

  std::vector<std::string> violations_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fou
