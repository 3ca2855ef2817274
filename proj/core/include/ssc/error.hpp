#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: wrong shapes, invalid parameters, malformed files. The CLI maps
/// these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation that did not produce a usable result. The CLI maps these to
/// exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class ParameterError : public InputError {
 public:
  using InputError::InputError;
};

class InsufficientDataError : public InputError {
 public:
  using InputError::InputError;
};

/// A transition matrix row is not a probability vector.
class NotStochasticError : public InputError {
 public:
  NotStochasticError(std::size_t row, const std::string& what)
      : InputError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// The chain has a closed proper subset of states (not irreducible).
class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

class ReversibilityError : public InputError {
 public:
  ReversibilityError(double max_violation, const std::string& what)
      : InputError(what), max_violation_(max_violation) {}
  double max_violation() const noexcept { return max_violation_; }

 private:
  double max_violation_;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyStateSpaceError : public InputError {
 public:
  using InputError::InputError;
};

class UndefinedRateError : public InputError {
 public:
  using InputError::InputError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(double residual, const std::string& what)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class NotMixedError : public NumericalError {
 public:
  NotMixedError(double last_distance, const std::string& what)
      : NumericalError(what), last_distance_(last_distance) {}
  double last_distance() const noexcept { return last_distance_; }

 private:
  double last_distance_;
};

/// The positive part of the rank-r truncation vanished entirely.
class DegenerateEstimateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GenerationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ssc
