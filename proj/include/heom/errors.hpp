// errors.hpp: exception types shared by the solver modules

#pragma once

#include <stdexcept>
#include <string>

namespace heom {

// Every error raised by the library derives from Error. The CLI maps the
// concrete type onto a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input (negative order, non-positive temperature, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Request is valid but beyond what the implementation supports.
class CapabilityError : public Error {
public:
    using Error::Error;
};

// Evaluation at or too close to a singular point.
class DomainError : public Error {
public:
    using Error::Error;
};

// Two poles of the bath expansion coincide.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

// Inconsistent shapes between indices, operators and hierarchy layout.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Propagation lost trace or produced non-finite values.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Active hierarchy grew past the configured budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace heom
