// errors.hpp: exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace mqmed {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model failed validation or an argument violates a documented precondition.
struct ModelError : Error {
    using Error::Error;
};

// Operation requires a bath family the model does not have.
struct UnsupportedBathError : Error {
    using Error::Error;
};

// Input is well formed but carries no usable information (e.g. zero spectral density).
struct DegenerateInputError : Error {
    using Error::Error;
};

// Half-line integral did not decay before the time cap.
struct NonConvergenceError : Error {
    using Error::Error;
};

// A dense representation would exceed its configured dimension cap.
struct DimensionCapError : Error {
    using Error::Error;
};

// Rate graph has more than one closed class, so the steady state is not unique.
struct ReducibleRateGraphError : Error {
    using Error::Error;
};

struct UnitError : Error {
    using Error::Error;
};

}  // namespace mqmed
