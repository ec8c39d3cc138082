#pragma once

#include <stdexcept>

namespace flamekit {

// Malformed input files or datasets. The CLI maps this to exit code 3.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solver or fitter failure (bracketing failed, singular system, no
// convergence). The CLI maps this to exit code 4.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace flamekit
