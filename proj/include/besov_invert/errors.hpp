#pragma once

#include <stdexcept>
#include <string>

namespace besov_invert {

/// Base of every error raised by the library. The CLI maps the subclasses to
/// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter value (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside the domain of the operation (p < 1, alpha <= 0, ...).
class ParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Array length or grid shape mismatch.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Out-of-range wavelet index or truncation count.
class IndexError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Numerical failure: singular system, quadrature that did not converge (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Request that exceeds what a backend can do, e.g. tensor quadrature for n > 3 (exit code 4).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// File system or format problem.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace besov_invert
