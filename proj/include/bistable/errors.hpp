#pragma once

#include <stdexcept>
#include <string>

namespace bistable {

// Validation errors: inputs violate a documented precondition or schema.
// Numerical errors: an algorithm failed to reach its tolerance or certificate.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};
struct SchemaError : ValidationError {
    using ValidationError::ValidationError;
};
struct NonFiniteEvaluation : ValidationError {
    using ValidationError::ValidationError;
};
struct DomainError : ValidationError {
    using ValidationError::ValidationError;
};
struct RegimeError : ValidationError {
    using ValidationError::ValidationError;
};
struct PreconditionError : ValidationError {
    using ValidationError::ValidationError;
};
struct GridError : ValidationError {
    using ValidationError::ValidationError;
};

struct NumericalError : Error {
    using Error::Error;
};
struct QuadratureFailure : NumericalError {
    using NumericalError::NumericalError;
};
struct NoFoldFound : NumericalError {
    using NumericalError::NumericalError;
};
struct NoConvergence : NumericalError {
    NoConvergence(const std::string& what, double residual)
        : NumericalError(what), final_residual(residual) {}
    double final_residual;
};
struct ContinuationStall : NumericalError {
    using NumericalError::NumericalError;
};
struct OrderingBreakdown : NumericalError {
    using NumericalError::NumericalError;
};
struct NearMinusTwo : NumericalError {
    using NumericalError::NumericalError;
};
struct StiffnessFailure : NumericalError {
    using NumericalError::NumericalError;
};
struct PrecisionLoss : NumericalError {
    using NumericalError::NumericalError;
};
struct BranchCutError : NumericalError {
    using NumericalError::NumericalError;
};
struct ContourTooCoarse : NumericalError {
    using NumericalError::NumericalError;
};
struct SolverFailure : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace bistable
