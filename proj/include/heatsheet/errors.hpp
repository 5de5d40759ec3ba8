#pragma once

#include <stdexcept>
#include <string>

namespace heatsheet {

// Error taxonomy shared by all modules. The CLI maps each category to a
// distinct exit code (see runner.hpp).

// Argument outside the mathematical domain of an operation (t <= 0, R <= 0, ...).
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A truncated series cannot meet its tail tolerance for the requested argument.
class PrecisionError : public std::runtime_error {
public:
  explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or inconsistent configuration (bad field value, missing certified
// bound, violated parameter invariant). Messages carry the offending field path.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solver failed to reach its certificate within the iteration budget.
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown inside a time stepper (NaN drift, non-finite state).
class IntegrationError : public std::runtime_error {
public:
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// A covariance matrix required to be invertible is numerically singular.
class DegeneracyError : public std::runtime_error {
public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// Operation called on an object missing required recorded state.
class StateError : public std::logic_error {
public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Sampler efficiency collapsed below the configured floor.
class EfficiencyError : public std::runtime_error {
public:
  explicit EfficiencyError(const std::string& what) : std::runtime_error(what) {}
};

// Requested approximation quality cannot be achieved (set shrinking, etc).
class ApproximationError : public std::runtime_error {
public:
  explicit ApproximationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace heatsheet
