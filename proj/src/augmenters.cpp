// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/augmenters.hpp>
#include <stainforge/error.hpp>

namespace stainforge {

SaConfig SaConfig::preset(SaScheme scheme, ColorSpace space, SaStrength strength) {
    const double w = strength == SaStrength::Light ? 0.05 : 0.25;
    SaConfig cfg;
    cfg.scheme = scheme;
    cfg.space = space;
    cfg.strength = strength;
    cfg.eps1 = {1.0 - w, 1.0 + w};
    for (std::size_t c = 0; c < 3; ++c) {
        const double span = channel_range(space, c).span();
        cfg.eps2[c] = {-w * span, w * span};
    }
    cfg.eps = {-w, w};
    validate(cfg);
    return cfg;
}

SaConfig SaConfig::identity(SaScheme scheme, ColorSpace space) {
    SaConfig cfg;
    cfg.scheme = scheme;
    cfg.space = space;
    validate(cfg);
    return cfg;
}

void validate(const SaConfig& cfg) {
    if (cfg.scheme == SaScheme::Sa1 && cfg.space != ColorSpace::Hed && cfg.space != ColorSpace::Lab)
        throw Error(ErrorCode::InvalidArgument, "SA1 runs in HED or LAB");
    if (cfg.scheme == SaScheme::Sa2 && cfg.space != ColorSpace::Hsv && cfg.space != ColorSpace::Lab)
        throw Error(ErrorCode::InvalidArgument, "SA2 runs in HSV or LAB");
    auto check = [](const Interval& iv, double identity, const char* name) {
        if (!(iv.lo <= iv.hi) || !iv.contains(identity))
            throw Error(ErrorCode::InvalidArgument,
                        std::string(name) + " range must be ordered and contain its identity value");
    };
    check(cfg.eps1, 1.0, "eps1");
    for (const auto& iv : cfg.eps2) check(iv, 0.0, "eps2");
    check(cfg.eps, 0.0, "eps");
}

void apply_sa1(PlaneImage& planes, const Vec3& eps1, const Vec3& eps2) {
    for (std::size_t c = 0; c < 3; ++c)
        for (double& p : planes.channels[c]) p = p * eps1[c] + eps2[c];
}

void apply_sa2(PlaneImage& planes, const Vec3& eps) {
    for (std::size_t c = 0; c < 3; ++c) {
        const double factor = 1.0 + eps[c];
        for (double& p : planes.channels[c]) p = p * factor;
    }
}

AugmentOutcome sa1(const RgbImage& img, const SaConfig& cfg, Rng& rng) {
    if (cfg.scheme != SaScheme::Sa1) throw Error(ErrorCode::InvalidArgument, "config is not SA1");
    validate(cfg);
    Vec3 eps1{}, eps2{};
    for (std::size_t c = 0; c < 3; ++c) {
        eps1[c] = rng.uniform(cfg.eps1.lo, cfg.eps1.hi);
        eps2[c] = rng.uniform(cfg.eps2[c].lo, cfg.eps2[c].hi);
    }
    PlaneImage planes = to_planes(img, cfg.space);
    apply_sa1(planes, eps1, eps2);
    BackConversion back = from_planes(planes);
    const double fraction = back.clamped_fraction();
    return {std::move(back.image), fraction};
}

AugmentOutcome sa2(const RgbImage& img, const SaConfig& cfg, Rng& rng) {
    if (cfg.scheme != SaScheme::Sa2) throw Error(ErrorCode::InvalidArgument, "config is not SA2");
    validate(cfg);
    Vec3 eps{};
    for (std::size_t c = 0; c < 3; ++c) eps[c] = rng.uniform(cfg.eps.lo, cfg.eps.hi);
    PlaneImage planes = to_planes(img, cfg.space);
    apply_sa2(planes, eps);
    BackConversion back = from_planes(planes);
    const double fraction = back.clamped_fraction();
    return {std::move(back.image), fraction};
}

} // namespace stainforge
