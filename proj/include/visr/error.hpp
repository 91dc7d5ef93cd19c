#pragma once

#include <stdexcept>
#include <string>

namespace visr {

/// Shape or size disagreement between arguments.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Precondition violated by an argument value (bad probability table, gamma >= 1, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// NaN/Inf, degenerate normalization, or a sampler that failed to converge.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration, checkpoint, or other input file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace visr
