// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>
#include <stainforge/template_sampler.hpp>

#include <algorithm>
#include <cmath>

namespace stainforge {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(seed ^ splitmix64(index)));
}

double Rng::uniform(double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double sample_scalar(const DistributionFamily& family, double location, double scale, Rng& rng) {
    if (!(scale >= 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be >= 0");
    if (scale == 0.0) return location;
    switch (family.kind) {
    case DistributionFamily::Kind::Gaussian:
        return std::normal_distribution<double>(location, scale)(rng.engine());
    case DistributionFamily::Kind::StudentT: {
        const double t = std::student_t_distribution<double>(family.dof)(rng.engine());
        return location + scale * std::sqrt((family.dof - 2.0) / family.dof) * t;
    }
    case DistributionFamily::Kind::Uniform: {
        const double half = std::sqrt(3.0) * scale;
        return rng.uniform(location - half, location + half);
    }
    case DistributionFamily::Kind::Laplace: {
        // Inverse CDF on u in (-1/2, 1/2).
        const double b = scale / std::sqrt(2.0);
        double u = 0.0;
        do {
            u = rng.uniform(-0.5, 0.5);
        } while (u == -0.5);
        return u < 0.0 ? location + b * std::log1p(2.0 * u) : location - b * std::log1p(-2.0 * u);
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown distribution family");
}

VirtualTemplate draw_template(const StyleDistribution& dist, Rng& rng) {
    VirtualTemplate t{dist.space, {}, {}};
    for (std::size_t c = 0; c < 3; ++c)
        t.avg[c] = sample_scalar(dist.family, dist.mean_of_avg[c], std::sqrt(dist.var_of_avg[c]), rng);
    for (std::size_t c = 0; c < 3; ++c)
        t.std[c] = sample_scalar(dist.family, dist.mean_of_std[c], std::sqrt(dist.var_of_std[c]), rng);
    return t;
}

VirtualTemplate sanitize(VirtualTemplate t) {
    for (std::size_t c = 0; c < 3; ++c) {
        const ChannelRange r = channel_range(t.space, c);
        t.avg[c] = std::clamp(t.avg[c], r.lo, r.hi);
        t.std[c] = std::max(t.std[c], kMinTemplateStd);
    }
    return t;
}

VirtualTemplate sample_template(const StyleDistribution& dist, Rng& rng) {
    return sanitize(draw_template(dist, rng));
}

} // namespace stainforge
