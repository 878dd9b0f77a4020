#pragma once

#include <stdexcept>
#include <string>

namespace isp {

/// Invalid or inconsistent configuration (bad law parameters, regime/law mismatch).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation not defined for the given variant of a tagged type.
class UnsupportedVariant : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature did not reach the requested tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what + " (estimate " + std::to_string(estimate) +
                           ", error bound " + std::to_string(error_bound) + ")"),
        estimate_(estimate),
        error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// Statistical estimator could not produce a value from the data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isp
