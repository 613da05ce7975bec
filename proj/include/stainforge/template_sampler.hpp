// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/stain_stats.hpp>

#include <cstdint>
#include <random>

namespace stainforge {

/// A sampled normalization target (A_v, D_v).
struct VirtualTemplate {
    ColorSpace space = ColorSpace::Lab;
    Vec3 avg{};
    Vec3 std{};

    static VirtualTemplate from_stats(const ChannelStats& s) { return {s.space, s.avg, s.std}; }
    friend bool operator==(const VirtualTemplate&, const VirtualTemplate&) = default;
};

/// Seedable generator owned by the caller.
///
/// Parallel drivers derive one generator per item with
///   Rng::derive(seed, index) == Rng(splitmix64(seed ^ splitmix64(index)))
/// so results do not depend on scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng derive(std::uint64_t seed, std::uint64_t index);

    std::mt19937_64& engine() noexcept { return engine_; }

    /// Uniform on [lo, hi); returns lo exactly when lo == hi.
    double uniform(double lo, double hi);

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Positive floor applied to sampled template std.
inline constexpr double kMinTemplateStd = 1e-3;

/// One draw from `family` matched to mean `location` and standard deviation
/// `scale`:
///   Gaussian  N(location, scale^2)
///   StudentT  location + scale * sqrt((dof-2)/dof) * T(dof)
///   Uniform   U[location - sqrt(3) scale, location + sqrt(3) scale]
///   Laplace   Laplace(location, scale / sqrt(2))
/// scale == 0 returns location exactly.
double sample_scalar(const DistributionFamily& family, double location, double scale, Rng& rng);

/// Six independent draws (three avg, then three std) before sanitation.
VirtualTemplate draw_template(const StyleDistribution& dist, Rng& rng);

/// Clamps avg into the channel ranges and std to >= kMinTemplateStd.
VirtualTemplate sanitize(VirtualTemplate t);

/// draw_template followed by sanitize.
VirtualTemplate sample_template(const StyleDistribution& dist, Rng& rng);

} // namespace stainforge
