#pragma once

#include <stdexcept>
#include <string>

namespace relfix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Points of different kinds, or grid functions on different grids.
class ShapeError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain (lambda >= 1, gamma pole, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration; the message names the offending field.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace relfix
