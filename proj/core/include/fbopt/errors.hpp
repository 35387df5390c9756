#pragma once

#include <stdexcept>
#include <string>

namespace fbopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or dimensionally inconsistent input.
struct InvalidInput : Error {
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
struct NumericalFailure : Error {
    using Error::Error;
};

/// Gain selection or controller assembly failed (e.g. not stabilizable).
struct SynthesisError : Error {
    using Error::Error;
};

/// A linear system of regulator equations is inconsistent.
struct NoSolution : Error {
    using Error::Error;
};

/// Evaluation outside the domain of a model map (e.g. no real equilibrium).
struct DomainError : Error {
    using Error::Error;
};

/// A documented precondition does not hold for the given arguments.
struct PreconditionError : Error {
    using Error::Error;
};

/// The problem lacks structure required by the requested method.
struct UnsupportedProblem : Error {
    using Error::Error;
};

}  // namespace fbopt
