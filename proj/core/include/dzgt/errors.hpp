#pragma once

#include <stdexcept>
#include <string>

namespace dzgt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// The parametric feasible set Z(x) is empty at the queried upper iterate.
class InfeasibleSetError : public Error {
 public:
  using Error::Error;
};

/// An iterate stopped being finite (overflow / NaN), typically a stepsize blowup.
class NonFiniteIterateError : public Error {
 public:
  using Error::Error;
};

/// The communication graph is not connected, so consensus cannot be reached.
class DisconnectedGraphError : public Error {
 public:
  using Error::Error;
};

/// A topology request is malformed (self-loop, index out of range, bad size).
class InvalidTopologyError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine hit its iteration cap before meeting its tolerance.
class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A smoothing radius of zero was used where a finite-difference step is required.
class ZeroRadiusError : public Error {
 public:
  using Error::Error;
};

/// The averaging parameter beta lies outside (0, min{2/3, 1/rho^2 - 1}).
class InvalidBetaError : public Error {
 public:
  using Error::Error;
};

/// A stepsize-threshold radicand came out negative; the constants have no real root.
class NegativeDiscriminantError : public Error {
 public:
  using Error::Error;
};

/// A configuration file could not be parsed. Carries the 1-based line and, when
/// known, the offending field name.
class ConfigParseError : public Error {
 public:
  ConfigParseError(int line, std::string field, const std::string& message)
      : Error("config parse error at line " + std::to_string(line) +
              (field.empty() ? std::string{} : " (key '" + field + "')") + ": " + message),
        line_(line),
        field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_ = 0;
  std::string field_;
};

/// A configuration value parsed fine but violates a documented range constraint.
class ConfigRangeError : public Error {
 public:
  ConfigRangeError(std::string field, const std::string& message)
      : Error("config range error for '" + field + "': " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace dzgt
