// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bitkv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid engine configuration (geometry, divisibility, flag combinations).
struct ConfigError : Error {
    using Error::Error;
};

// Tensor or buffer dimensions do not conform.
struct ShapeError : Error {
    using Error::Error;
};

// Bit width outside the supported set.
struct UnsupportedBits : Error {
    using Error::Error;
};

// A quantized code does not fit its bit field.
struct CodeOverflow : Error {
    using Error::Error;
};

// Buffer or pool is full (residual buffer, page pool).
struct CapacityError : Error {
    using Error::Error;
};

// Cache state machine precondition violated.
struct StateError : Error {
    using Error::Error;
};

// Malformed or truncated serialized cache file.
struct FormatError : Error {
    FormatError(const std::string& what, size_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    size_t offset;
};

// A reduction was handed an empty input list.
struct EmptyInput : Error {
    using Error::Error;
};

}  // namespace bitkv
