#pragma once

#include <stdexcept>

namespace chainlab {

// Input vector/matrix sizes disagree with the object's dimension.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A chord or body turned out to be unbounded where boundedness is required.
struct UnboundedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iteration/rejection budget was exhausted.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical routine failed to converge or produced unusable values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace chainlab
