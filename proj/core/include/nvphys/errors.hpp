#pragma once

#include <stdexcept>
#include <string>

namespace nvphys {

// Malformed user input: bad shapes, bad files, inconsistent parameters.
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, singular systems, overflow.
// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nvphys
