#pragma once

#include <stdexcept>
#include <string>

namespace headglance {

// Base for every error the library raises. The CLI maps the subclasses
// onto exit codes (validation 3, runtime 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, configs, datasets).
class DataError : public Error {
public:
    using Error::Error;
};

// A caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Numerical failure during fitting or evaluation (divergence, singular input).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace headglance
