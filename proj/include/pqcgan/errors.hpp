#pragma once

#include <stdexcept>
#include <string>

namespace pqcgan {

/// Bad configuration or malformed input file. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed data file; the message names the offending line.
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};

/// A numeric pipeline produced a non-finite value. The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pqcgan
