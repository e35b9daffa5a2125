#pragma once

#include <stdexcept>
#include <string>

namespace danse {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid physical or numerical parameter values.
struct ParameterError : Error {
    using Error::Error;
};

// Size/geometry mismatches: initial state wider than the box, site index
// outside the grid, traces on different grids, ...
struct GeometryError : Error {
    using Error::Error;
};

// Site index outside the grid.
struct IndexError : GeometryError {
    using GeometryError::GeometryError;
};

// Nonlinear fixed-point iteration failed to converge within nl_iters.
// Carries the last iteration residual so the caller can decide whether
// halving dt is worth a retry.
struct StepError : Error {
    StepError(const std::string& msg, double residual_, double t_)
        : Error(msg), residual(residual_), t(t_) {}
    double residual;
    double t;
};

// A realization inside an ensemble failed; index and seed allow replay.
struct EnsembleError : Error {
    EnsembleError(const std::string& msg, int index_, unsigned long long seed_)
        : Error(msg), index(index_), seed(seed_) {}
    int index;
    unsigned long long seed;
};

// Traces with incompatible specs cannot be pooled.
struct MergeError : Error {
    using Error::Error;
};

// Fit could not be set up (degenerate input, empty window, ...).
struct FitError : Error {
    using Error::Error;
};

}  // namespace danse
