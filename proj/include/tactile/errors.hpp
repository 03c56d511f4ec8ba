#pragma once

#include <stdexcept>
#include <string>

namespace tactile {

/// Bad user input: malformed config, shape mismatch, out-of-range argument.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point or state outside the domain an operation is defined on
/// (off-surface positions, points behind the pinhole plane).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite values during training or gradient evaluation. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tactile
