#pragma once

#include <stdexcept>
#include <string>

namespace spde {

// Error taxonomy shared by all modules.  The CLI maps these onto exit codes:
// usage/config problems -> 2, numerical failures -> 3, invariant violations -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A parameter outside its mathematical domain (k = 0 mode, negative time, ...).
struct DomainError : Error {
    using Error::Error;
};

// Floating-point breakdown during integration (overflow of the cubic, NaN state).
// Carries the failing step index when known.
struct NumericalError : Error {
    long step_index = -1;
    explicit NumericalError(const std::string& msg, long step = -1)
        : Error(step >= 0 ? msg + " (step " + std::to_string(step) + ")" : msg),
          step_index(step) {}
};

// A checked mathematical invariant failed beyond tolerance.
struct InvariantViolation : Error {
    using Error::Error;
};

// The caller asked for something the estimator cannot validly provide.
struct UsageError : Error {
    using Error::Error;
};

// A statistical procedure received degenerate input (constant sample,
// all-censored record, non-convex transform input).
struct EstimationError : Error {
    using Error::Error;
};

}  // namespace spde
