#pragma once

#include <stdexcept>
#include <string>

namespace trm {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

/// Matrix dimensions do not match the expected grid/subdivision shape.
struct ShapeMismatch : Error {
    using Error::Error;
};

/// A normalized density left [0,1] by more than the drift tolerance.
struct DomainError : Error {
    using Error::Error;
};

/// A scaling coefficient left the open interval (0, 1/2).
struct CflViolation : Error {
    using Error::Error;
};

/// Requested an operation the scheme does not support (e.g. Godunov Jacobians).
struct UnsupportedScheme : Error {
    using Error::Error;
};

struct InverseOutOfRange : Error {
    using Error::Error;
};

struct EmptyObservationSet : Error {
    using Error::Error;
};

/// Trajectory/CSV parse failure; message carries file and line context.
struct ParseError : Error {
    using Error::Error;
};

struct MissingColumn : Error {
    using Error::Error;
};

struct NoVehicles : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace trm
