// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/template_sampler.hpp>

#include <optional>

namespace stainforge {

struct NormalizeOutcome {
    RgbImage image;
    std::optional<VirtualTemplate> template_used;   // empty for modes without a template
    double clamped_fraction = 0.0;
};

/// Per-channel moment alignment on planes already in `target.space`:
///   p' = (d_v / d_i) * (p - a_i) + a_v
/// A channel with d_i == 0 is shifted only (scale 1).
PlaneImage align_moments(const PlaneImage& planes, const ChannelStats& source,
                         const VirtualTemplate& target);

/// Converts to target.space, measures the image, aligns and converts back.
NormalizeOutcome normalize_to_template(const RgbImage& img, const VirtualTemplate& target);

/// Same, with caller-supplied source statistics (must be in target.space).
NormalizeOutcome normalize_to_template(const RgbImage& img, const VirtualTemplate& target,
                                       const ChannelStats& precomputed_source);

/// Reinhard-style SN against a reference image measured in `space`.
NormalizeOutcome reinhard_normalize(const RgbImage& img, const RgbImage& template_img,
                                    ColorSpace space);

} // namespace stainforge
