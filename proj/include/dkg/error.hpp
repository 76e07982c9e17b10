#pragma once

#include <stdexcept>
#include <string>

namespace dkg {

/// Root of every error raised by the library. Each subclass maps to one
/// failure category so that the CLI can turn it into an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run parameters (odd grid size, p <= 3, unknown config key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (|v| >= 1, x = 0
/// for a singular kernel, negative radius).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// API misuse: representation mismatch, mismatched grids, empty series.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value produced or consumed by a numerical kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Evaluation time outside a sampled nucleus path.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed (nonpositive norms in a log fit,
/// malformed CSV or dump files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Picard iteration failed to contract or produced NaN.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis checked before a run does not hold. The message
/// names the violated hypothesis.
class GateError : public Error {
 public:
  GateError(std::string hypothesis, const std::string& what)
      : Error(what), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// A nucleus iterate left the ball B of the q fixed-point map.
class BallViolation : public Error {
 public:
  BallViolation(std::string constraint, double time, const std::string& what)
      : Error(what), constraint_(std::move(constraint)), time_(time) {}
  const std::string& constraint() const noexcept { return constraint_; }
  double time() const noexcept { return time_; }

 private:
  std::string constraint_;
  double time_;
};

}  // namespace dkg
