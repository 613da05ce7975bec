// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stainforge {

enum class ErrorCode {
    InvalidArgument,
    MixedColorSpace,
    InsufficientSamples,
    EmptyCorpus,
    MissingDistribution,
    Io,
    Decode,
    Parse,
    VersionMismatch,
    SinkWrite,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the core carries one of the codes above so the
/// C layer can translate it into a stable status value.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by batch drivers; wraps the per-item failure with its position.
class BatchItemError : public Error {
public:
    BatchItemError(std::size_t index, const Error& cause)
        : Error(cause.code(), "item " + std::to_string(index) + ": " + cause.what()),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

} // namespace stainforge
