#pragma once

#include <stdexcept>
#include <string>

namespace hemorom {

/// Bad or inconsistent user configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (solver divergence, NaN state, blow-up guard). CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File and format problems. CLI exit code 4.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched field/mesh/basis sizes.
struct DimensionError : NumericalError {
  explicit DimensionError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace hemorom
