// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>

namespace stainforge {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MixedColorSpace: return "MixedColorSpace";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MissingDistribution: return "MissingDistribution";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Decode: return "Decode";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::SinkWrite: return "SinkWrite";
    }
    return "Unknown";
}

} // namespace stainforge
