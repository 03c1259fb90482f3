#pragma once

#include <stdexcept>
#include <string>

namespace lgf {

// Common base so callers can catch anything the library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};
struct ContractError : Error {
    using Error::Error;
};
struct UnsupportedOpError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct IntegrityError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace lgf
