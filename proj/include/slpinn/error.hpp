#pragma once

#include <stdexcept>
#include <string>

namespace slpinn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Point or parameter outside the admissible domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation requested on a domain/variant for which it is not defined.
class NotApplicable : public Error {
public:
    using Error::Error;
};

/// Evaluation at a coordinate singularity (circle centre, ellipse focal segment).
class SingularPoint : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or residual during evaluation or training.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace slpinn
