#pragma once

#include <stdexcept>
#include <string>

namespace qftscat {

// Bad input: wrong dimension, out-of-range parameter, malformed config.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine could not meet its configured tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RootFindingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace qftscat
