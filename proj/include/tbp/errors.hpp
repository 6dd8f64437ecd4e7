#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace tbp {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments or malformed inputs (non-finite entries, shape mismatch, ...).
struct InvalidInput : Error {
  using Error::Error;
};

// Pullback metric numerically singular; carries the offending point so the
// caller can apply the degenerate-point policy.
struct SingularMetric : Error {
  explicit SingularMetric(Eigen::VectorXd theta_, const std::string& what = "singular pullback metric")
      : Error(what), theta(std::move(theta_)) {}
  Eigen::VectorXd theta;
};

// Compactness came out non-positive or non-finite.
struct DegenerateCompactness : Error {
  using Error::Error;
};

// A requested quantity needs an evaluator the model does not provide.
struct NotAvailable : Error {
  using Error::Error;
};

// Prior vanished on every sample.
struct DegeneratePrior : Error {
  using Error::Error;
};

// Configuration / schema problems (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Numeric failures during a run (CLI exit code 3).
struct NumericError : Error {
  using Error::Error;
};

}  // namespace tbp
