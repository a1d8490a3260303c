#pragma once

#include <stdexcept>
#include <string>

namespace codecomp {

/// Invalid shapes, schemes or option values. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, truncated or inconsistent input data. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A NaN or Inf escaped a computation. CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace codecomp
