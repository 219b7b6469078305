#pragma once

#include <stdexcept>
#include <string>

namespace dipsmc {

/// Bad user-supplied parameter or configuration value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, dimensions, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown at runtime (degenerate weights, non-finite values, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dipsmc
