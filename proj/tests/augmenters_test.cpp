// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include "support.hpp"

#include <stainforge/augmenters.hpp>
#include <stainforge/error.hpp>

#include <doctest.h>

using namespace stainforge;
using sftest::max_abs_diff;

namespace {

struct Pairing {
    SaScheme scheme;
    ColorSpace space;
};
const Pairing kValid[] = {{SaScheme::Sa1, ColorSpace::Hed},
                          {SaScheme::Sa1, ColorSpace::Lab},
                          {SaScheme::Sa2, ColorSpace::Hsv},
                          {SaScheme::Sa2, ColorSpace::Lab}};

AugmentOutcome run(const RgbImage& img, const SaConfig& cfg, Rng& rng) {
    return cfg.scheme == SaScheme::Sa1 ? sa1(img, cfg, rng) : sa2(img, cfg, rng);
}

} // namespace

TEST_CASE("zero-width noise is a colour-space round trip") {
    const RgbImage img = sftest::noise_image(40, 40, 2, 10, 255);
    for (const auto& p : kValid) {
        Rng rng(1);
        const auto out = run(img, SaConfig::identity(p.scheme, p.space), rng);
        CHECK(max_abs_diff(out.image, img) <= (p.space == ColorSpace::Hed ? 2 : 1));
    }
}

TEST_CASE("presets validate and light lies inside strong") {
    for (const auto& p : kValid) {
        const SaConfig light = SaConfig::preset(p.scheme, p.space, SaStrength::Light);
        const SaConfig strong = SaConfig::preset(p.scheme, p.space, SaStrength::Strong);
        CHECK_NOTHROW(validate(light));
        CHECK_NOTHROW(validate(strong));
        CHECK(strong.eps1.contains(light.eps1));
        CHECK(strong.eps.contains(light.eps));
        for (int c = 0; c < 3; ++c) {
            CHECK(strong.eps2[c].contains(light.eps2[c]));
            CHECK(light.eps2[c].contains(0.0));
            const double span = channel_range(p.space, c).span();
            CHECK(light.eps2[c].hi == doctest::Approx(0.05 * span));
            CHECK(strong.eps2[c].lo == doctest::Approx(-0.25 * span));
        }
        CHECK(light.eps1.lo == doctest::Approx(0.95));
        CHECK(strong.eps1.hi == doctest::Approx(1.25));
        CHECK(light.eps.hi == doctest::Approx(0.05));
        CHECK(strong.eps.lo == doctest::Approx(-0.25));
    }
}

TEST_CASE("light draws are attainable under strong") {
    const SaConfig light = SaConfig::preset(SaScheme::Sa1, ColorSpace::Hed, SaStrength::Light);
    const SaConfig strong = SaConfig::preset(SaScheme::Sa1, ColorSpace::Hed, SaStrength::Strong);
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const double e1 = rng.uniform(light.eps1.lo, light.eps1.hi);
        const double e2 = rng.uniform(light.eps2[0].lo, light.eps2[0].hi);
        CHECK((strong.eps1.contains(e1) && strong.eps2[0].contains(e2)));
    }
}

TEST_CASE("validate rejects bad pairings and intervals") {
    CHECK_THROWS_AS(validate(SaConfig::identity(SaScheme::Sa1, ColorSpace::Hsv)), Error);
    CHECK_THROWS_AS(validate(SaConfig::identity(SaScheme::Sa2, ColorSpace::Hed)), Error);
    SaConfig off = SaConfig::identity(SaScheme::Sa1, ColorSpace::Hed);
    off.eps1 = {1.1, 1.2};
    CHECK_THROWS_AS(validate(off), Error);
    SaConfig reversed = SaConfig::identity(SaScheme::Sa2, ColorSpace::Hsv);
    reversed.eps = {0.1, -0.1};
    CHECK_THROWS_AS(validate(reversed), Error);
    Rng rng(0);
    CHECK_THROWS_AS(sa1(sftest::constant_image(1, 1, 1, 1, 1), SaConfig::identity(SaScheme::Sa2, ColorSpace::Hsv), rng), Error);
}

TEST_CASE("additive noise moves a constant image as a whole") {
    const RgbImage img = sftest::constant_image(6, 6, 180, 120, 170);
    for (ColorSpace s : {ColorSpace::Hed, ColorSpace::Lab}) {
        SaConfig cfg = SaConfig::identity(SaScheme::Sa1, s);
        for (int c = 0; c < 3; ++c) cfg.eps2[c] = {-0.05 * channel_range(s, c).span(), 0.05 * channel_range(s, c).span()};
        Rng rng(5);
        const auto out = sa1(img, cfg, rng);
        CHECK(!(out.image == img));
        for (std::size_t i = 1; i < out.image.pixel_count(); ++i)
            CHECK(std::equal(out.image.pixel(i), out.image.pixel(i) + 3, out.image.pixel(0)));
    }
}

TEST_CASE("noise is drawn per channel, not per pixel") {
    PlaneImage p(ColorSpace::Lab, 3, 1);
    p.channels[0] = {10.0, 20.0, 30.0};
    p.channels[1] = {-5.0, 0.0, 5.0};
    p.channels[2] = {1.0, 2.0, 4.0};
    PlaneImage q = p;
    apply_sa1(q, {2.0, 0.5, 1.0}, {1.0, 0.0, -1.0});
    CHECK(q.channels[0] == std::vector<double>{21.0, 41.0, 61.0});
    CHECK(q.channels[1] == std::vector<double>{-2.5, 0.0, 2.5});
    CHECK(q.channels[2] == std::vector<double>{0.0, 1.0, 3.0});
}

TEST_CASE("fixed seed gives identical bytes") {
    const RgbImage img = sftest::he_image(32, 32, 6);
    for (const auto& p : kValid) {
        const SaConfig cfg = SaConfig::preset(p.scheme, p.space, SaStrength::Strong);
        Rng a(42), b(42), c(43);
        const auto x = run(img, cfg, a);
        CHECK(x.image == run(img, cfg, b).image);
        CHECK(!(x.image == run(img, cfg, c).image));
    }
}

TEST_CASE("eps = -1 zeroes every channel") {
    const RgbImage img = sftest::he_image(8, 8, 1);
    for (ColorSpace s : {ColorSpace::Hsv, ColorSpace::Lab}) {
        PlaneImage planes = to_planes(img, s);
        apply_sa2(planes, {-1.0, -1.0, -1.0});
        for (const auto& ch : planes.channels)
            for (double v : ch) CHECK(v == 0.0);
        CHECK(from_planes(planes).image == sftest::constant_image(8, 8, 0, 0, 0));
    }
    // Pushing V past zero exercises the clamp path.
    PlaneImage hsv = to_planes(img, ColorSpace::Hsv);
    apply_sa2(hsv, {0.0, 0.0, -1.5});
    const auto out = from_planes(hsv);
    CHECK(out.image == sftest::constant_image(8, 8, 0, 0, 0));
    CHECK(out.clamped_fraction() == 1.0);
}

TEST_CASE("SA2 with eps equals SA1 with eps1 = 1 + eps and eps2 = 0") {
    const RgbImage img = sftest::noise_image(16, 16, 12);
    for (ColorSpace s : {ColorSpace::Lab, ColorSpace::Hsv}) {
        const PlaneImage base = to_planes(img, s);
        const Vec3 eps{0.07, -0.12, 0.2};
        PlaneImage a = base, b = base;
        apply_sa2(a, eps);
        apply_sa1(b, {1.0 + eps[0], 1.0 + eps[1], 1.0 + eps[2]}, {0.0, 0.0, 0.0});
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < a.pixel_count(); ++i)
                CHECK(std::abs(a.channels[c][i] - b.channels[c][i]) <= 1e-12 * std::max(1.0, std::abs(a.channels[c][i])));
    }
}

TEST_CASE("SA1 with zero-width eps2 consumes the same draws as SA2") {
    const RgbImage img = sftest::he_image(16, 16, 4);
    SaConfig c1 = SaConfig::identity(SaScheme::Sa1, ColorSpace::Lab);
    c1.eps1 = {0.8, 1.2};
    SaConfig c2 = SaConfig::identity(SaScheme::Sa2, ColorSpace::Lab);
    c2.eps = {-0.2, 0.2};
    Rng a(9), b(9);
    CHECK(max_abs_diff(sa1(img, c1, a).image, sa2(img, c2, b).image) <= 1);
}
