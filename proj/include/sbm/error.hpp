#pragma once

#include <stdexcept>
#include <string>

namespace sbm {

/// Argument outside the mathematical domain of an operation (λ ≤ 0, r ≤ 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or estimator failure; the message carries diagnostics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Monte-Carlo output too noisy for the requested post-processing.
class InsufficientSamples : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace sbm
