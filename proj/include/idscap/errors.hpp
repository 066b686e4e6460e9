// Exception hierarchy shared by all idscap components.
#pragma once

#include <stdexcept>
#include <string>

namespace idscap {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input: a matrix row that does not sum to one, a probability
/// outside [0,1], an unknown configuration field, and the like.
struct ValidationError : Error {
    using Error::Error;
};

/// Structurally valid parameters that resolve to an impossible channel
/// (e.g. a per-state deletion probability above 1).
struct InfeasibleError : Error {
    using Error::Error;
};

/// A computation was refused because it would exceed a memory/size guard.
struct GuardError : Error {
    using Error::Error;
};

/// Side information turned out to depend on the channel input, so the
/// conditioned-DMC decomposition is not valid for this channel.
struct SideInfoError : Error {
    using Error::Error;
};

/// Iterative solver ran out of iterations. Carries the bracket it reached.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double lower, double upper, long iterations)
        : Error(msg), lower_bits(lower), upper_bits(upper), iterations(iterations) {}
    double lower_bits;
    double upper_bits;
    long iterations;
};

} // namespace idscap
