#pragma once

#include <stdexcept>
#include <string>

namespace polythresh {

/// Base of every error raised by the toolkit. `operation()` names the
/// failing entry point so the CLI can report it on a single line.
class Error : public std::runtime_error {
 public:
  Error(std::string operation, const std::string& what)
      : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}

  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

/// Bad caller input (violated precondition). Maps to CLI exit status 2.
class ValidationError : public Error {
  using Error::Error;
};

/// Argument outside the domain of a function (support, MGF domain, clip).
class DomainError : public ValidationError {
  using ValidationError::ValidationError;
};

/// A density was requested from a purely atomic measure.
class AtomicMeasure : public ValidationError {
  using ValidationError::ValidationError;
};

/// Precondition of a theoretical bound is not met (e.g. n too small).
class NotApplicable : public ValidationError {
  using ValidationError::ValidationError;
};

/// Simulation parameters exceed the configured operation cap.
class BudgetExceeded : public ValidationError {
  using ValidationError::ValidationError;
};

/// Numerical failures. Map to CLI exit status 1.
class NumericalFailure : public Error {
  using Error::Error;
};

class QuadratureFailure : public NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

class ConvergenceFailure : public NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

/// A membership certificate failed re-verification.
class NumericalInstability : public NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

class RejectionTooSlow : public NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

}  // namespace polythresh
