#pragma once

#include <stdexcept>
#include <string>

namespace permtraffic {

// Thrown when a computation would exceed a configured size cap (CLI exit 3).
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

// invalid configuration or input file; the message starts with the offending
// field path so batch tooling can surface it
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace permtraffic
