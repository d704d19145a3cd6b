#pragma once

#include <stdexcept>
#include <string>

namespace udalab {

/// A quadrature or downstream computation produced NaN/Inf.
struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integration range does not cover the required 6-sigma span.
struct RangeCoverageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver failed to reach its stopping tolerances.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace udalab
