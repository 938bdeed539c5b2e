#pragma once

#include <stdexcept>
#include <string>

namespace fracbc {

/// Invalid configuration: out-of-range sizes, mismatched bases, unknown keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A requested accuracy cannot be met with the given discretization.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear algebra or iteration failure (non-finite entries, no convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The truncated system cannot reach the requested target (zero Gram).
class NotControllableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fracbc
