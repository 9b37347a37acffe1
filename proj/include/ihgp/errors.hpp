#pragma once

#include <stdexcept>
#include <string>

namespace ihgp {

/// Invalid hyperparameter or argument outside its domain.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// System matrix fails a stability requirement (non-Hurwitz F, rho(A) >= 1).
class StabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver exhausted its budget without meeting tolerance.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must be positive definite is numerically singular.
class ConditioningError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical degeneracy outside solver control (non-positive innovation, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or data that violates a documented precondition.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration (model/grid mismatch, missing fields).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ihgp
