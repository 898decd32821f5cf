#pragma once

#include <stdexcept>

namespace mesbm {

// Invalid or inconsistent input; CLI maps this to exit code 2.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure such as non-convergence; CLI maps this to exit code 3
// when running in strict mode.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace mesbm
