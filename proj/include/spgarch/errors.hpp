#pragma once

#include <stdexcept>
#include <string>

namespace spgarch {

/// Base class for all domain errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystem : Error {
    using Error::Error;
};

struct NonPositiveH : Error {
    using Error::Error;
};

struct ZeroInnovation : Error {
    using Error::Error;
};

struct ZeroObservation : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

struct SingularJacobian : Error {
    using Error::Error;
};

struct RejectionBudgetExhausted : Error {
    using Error::Error;
};

struct OptimFailed : Error {
    using Error::Error;
};

struct AllFitsFailed : Error {
    using Error::Error;
};

struct ConstantInput : Error {
    using Error::Error;
};

struct EmptyWeights : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace spgarch
