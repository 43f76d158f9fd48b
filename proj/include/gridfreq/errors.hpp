#pragma once

#include <stdexcept>
#include <string>

namespace gridfreq {

// Raised for anything wrong with user-supplied configuration: syntax, schema,
// invariant violations. The message carries the field path / source location.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical procedure fails (diverging integration, rank-deficient
// regression, non-converging fit).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gridfreq
