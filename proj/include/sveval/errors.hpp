#pragma once

#include <stdexcept>
#include <string>

namespace sveval {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or arguments violate a documented precondition.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A computation could not produce a finite, meaningful result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A ratio metric whose denominator class is empty (or too small for a
/// variance estimate). Never reported as NaN.
class UndefinedMetricError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Complete or quasi-complete separation detected while fitting a
/// logistic model.
class SeparationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sveval
