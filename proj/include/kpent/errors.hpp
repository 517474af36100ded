#pragma once

#include <stdexcept>
#include <string>

namespace kpent {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (negative alpha,
// negative density value, non-positive radius, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (unnormalized grid, non-contractive
// pair, commutation failure, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IncompatibleGridError : public Error {
 public:
  using Error::Error;
};

class EmptySupportError : public Error {
 public:
  using Error::Error;
};

// Pushforward target grid does not cover the image of the source support.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Iterative numerics that failed to converge, or a degenerate matrix where a
// nonsingular one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Harness configuration problems, including inputs that violate a theorem's
// hypothesis class. Mapped to exit status 2 by the CLI.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class HypothesisError : public ConfigError {
 public:
  HypothesisError(const std::string& theorem, const std::string& hypothesis)
      : ConfigError(theorem + ": hypothesis violated: " + hypothesis) {}
};

}  // namespace kpent
