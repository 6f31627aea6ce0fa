#pragma once

#include <stdexcept>
#include <string>

namespace clockshift {

/// Failure categories. The numeric values are the CLI exit codes.
enum class ErrorKind : int {
  Input = 2,
  Numerical = 3,
  MissingConstant = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad quantum numbers, schema violations, invalid parameters.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

/// Tracking ambiguity, failed root certification, step underflow.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// An optional atomic constant (theta, alpha2J, delta_alpha0) was needed but not supplied.
class MissingConstantError : public Error {
 public:
  explicit MissingConstantError(const std::string& what) : Error(ErrorKind::MissingConstant, what) {}
};

/// Rank-2 matrix requested for a level with J < 1.
class RankUndefinedError : public InputError {
 public:
  explicit RankUndefinedError(const std::string& what) : InputError(what) {}
};

}  // namespace clockshift
