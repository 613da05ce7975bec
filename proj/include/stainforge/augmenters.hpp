// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/template_sampler.hpp>

namespace stainforge {

enum class SaScheme { Sa1, Sa2 };
enum class SaStrength { Light, Strong };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
    bool contains(const Interval& other) const noexcept { return other.lo >= lo && other.hi <= hi; }
};

/// Noise ranges for the stain-augmentation baselines.
///   SA1: p' = p * eps1 + eps2     (eps1 unitless around 1, eps2 in channel units)
///   SA2: p' = p * (1 + eps)       (eps unitless around 0)
/// eps2 is per channel because channel units differ.
struct SaConfig {
    SaScheme scheme = SaScheme::Sa1;
    ColorSpace space = ColorSpace::Hed;
    SaStrength strength = SaStrength::Light;
    Interval eps1{1.0, 1.0};
    std::array<Interval, 3> eps2{};
    Interval eps{};

    /// Light: eps1 in [0.95,1.05], eps2 in +-0.05 * channel span, eps in [-0.05,0.05].
    /// Strong: eps1 in [0.75,1.25], eps2 in +-0.25 * channel span, eps in [-0.25,0.25].
    static SaConfig preset(SaScheme scheme, ColorSpace space, SaStrength strength);

    /// Zero-width noise; the transform reduces to a color-space round trip.
    static SaConfig identity(SaScheme scheme, ColorSpace space);
};

/// Checks scheme/space pairing (SA1: HED or LAB; SA2: HSV or LAB) and that
/// every interval is ordered and contains its identity value.
void validate(const SaConfig& cfg);

void apply_sa1(PlaneImage& planes, const Vec3& eps1, const Vec3& eps2);
void apply_sa2(PlaneImage& planes, const Vec3& eps);

struct AugmentOutcome {
    RgbImage image;
    double clamped_fraction = 0.0;
};

/// Draw order per channel c = 0..2: eps1[c] then eps2[c]. One draw per
/// channel per image.
AugmentOutcome sa1(const RgbImage& img, const SaConfig& cfg, Rng& rng);

/// One eps per channel per image.
AugmentOutcome sa2(const RgbImage& img, const SaConfig& cfg, Rng& rng);

} // namespace stainforge
