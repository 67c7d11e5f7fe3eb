#pragma once

#include <stdexcept>
#include <string>

namespace csifb {

/// Invalid configuration or precondition violation on user-supplied input.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: non-Hermitian input, indefinite covariance, eigensolver failure.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Too many ill-conditioned draws while estimating zero-forcing moments.
class ZfDegenerateError : public NumericError {
 public:
  explicit ZfDegenerateError(const std::string& what) : NumericError(what) {}
};

}  // namespace csifb
