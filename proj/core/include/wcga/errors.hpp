#pragma once

#include <stdexcept>
#include <string>

namespace wcga {

/// Base class for numerical failures raised by the library. Argument
/// validation failures use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Gram matrix of a span exceeded the conditioning limit.
class NumericallyDependentSpan : public NumericalError {
 public:
  explicit NumericallyDependentSpan(const std::string& what, double condition = 0.0)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A Gram submatrix used by a condition estimator is singular.
class SingularGram : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Exhaustive enumeration would exceed the configured combination cap.
class CapExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace wcga
