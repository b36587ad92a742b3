#pragma once

#include <stdexcept>
#include <string>

namespace shapekin {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A claimed metric is not symmetric positive definite.
struct MetricError : Error {
    using Error::Error;
};

// det F <= 0: the body would be singularly compressed or inverted.
struct SingularCompressionError : Error {
    using Error::Error;
};

// A shape-like tensor lost positivity (needed under ln/sqrt).
struct NonPositiveShapeError : Error {
    using Error::Error;
};

// Argument outside the declared domain (time window, step size, ...).
struct DomainError : Error {
    using Error::Error;
};

// Grid too small for the stencil, count overflow, point outside the box.
struct GridError : Error {
    using Error::Error;
};

// A field or tensor violates a required symmetry.
struct SymmetryError : Error {
    using Error::Error;
};

// A rotation-valued input is not orthogonal w.r.t. the active metric.
struct FrameError : Error {
    using Error::Error;
};

// A strain field fails the compatibility threshold for reconstruction.
struct IncompatibleFieldError : Error {
    using Error::Error;
};

// A trajectory violates the small-change regime of an approximation.
struct RegimeError : Error {
    using Error::Error;
};

// Scenario configuration is malformed.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace shapekin
