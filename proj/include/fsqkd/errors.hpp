#pragma once

#include <stdexcept>

namespace fsqkd {

// Error taxonomy. Bad inputs raise ArgumentError / DomainError / FormatError;
// questions a model cannot answer raise UnsupportedQueryError or
// UndefinedQberError; numeric breakdowns raise NumericError.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct UnsupportedQueryError : Error {
    using Error::Error;
};

struct EstimationError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct UndefinedQberError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fsqkd
