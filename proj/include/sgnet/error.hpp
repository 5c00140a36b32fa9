#pragma once

#include <stdexcept>
#include <string>

namespace sgnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand extents or channel counts do not fit the operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A forward op produced NaN/Inf, or a training loss went non-finite.
class NumericError : public Error {
public:
    using Error::Error;
};

// Malformed image or checkpoint payload.
class FormatError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sgnet
