// errors.hpp: exception types shared by the library and the harness

#pragma once

#include <stdexcept>
#include <string>

namespace loschmidt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shapes that do not fit together, or a joint space above the size cap.
struct DimensionError : Error {
    using Error::Error;
};

// Argument outside an operation's domain (non-Hermitian input, bad index, ...).
struct DomainError : Error {
    using Error::Error;
};

// A numerical invariant failed at run time (integrator drift, step control).
struct NumericalError : Error {
    using Error::Error;
};

} // namespace loschmidt
