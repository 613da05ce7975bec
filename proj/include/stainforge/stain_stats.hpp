// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/colorspace.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stainforge {

/// Style descriptor of one image: per-channel mean and population standard
/// deviation in one color space.
struct ChannelStats {
    ColorSpace space = ColorSpace::Lab;
    Vec3 avg{};
    Vec3 std{};
};

struct DistributionFamily {
    enum class Kind { Gaussian, StudentT, Uniform, Laplace };

    static constexpr double kDefaultDof = 5.0;

    Kind kind = Kind::Gaussian;
    double dof = kDefaultDof;   // StudentT only; must exceed 2

    static DistributionFamily gaussian() { return {Kind::Gaussian, kDefaultDof}; }
    static DistributionFamily student_t(double dof = kDefaultDof);
    static DistributionFamily uniform() { return {Kind::Uniform, kDefaultDof}; }
    static DistributionFamily laplace() { return {Kind::Laplace, kDefaultDof}; }

    friend bool operator==(const DistributionFamily&, const DistributionFamily&) = default;
};

/// "gaussian" | "t" | "uniform" | "laplace".
std::string_view to_string(DistributionFamily::Kind kind) noexcept;
DistributionFamily parse_family(std::string_view name, double dof = DistributionFamily::kDefaultDof);

/// Dataset-level fit for one color space. Covariances are diagonal and stored
/// as variance vectors.
struct StyleDistribution {
    ColorSpace space = ColorSpace::Lab;
    Vec3 mean_of_avg{};
    Vec3 var_of_avg{};
    Vec3 mean_of_std{};
    Vec3 var_of_std{};
    DistributionFamily family;
    std::uint64_t n_samples = 0;

    /// (M_A, M_D) as a descriptor; the SN baseline's default target.
    ChannelStats mean_template() const { return {space, mean_of_avg, mean_of_std}; }
};

/// Population mean / std per channel, single pass.
ChannelStats channel_stats(const PlaneImage& planes);

/// Streaming Welford accumulator over per-image descriptors. Variances use
/// the n-1 divisor.
class StyleAccumulator {
public:
    explicit StyleAccumulator(ColorSpace space) : space_(space) {}

    /// Throws MixedColorSpace when `stats` was measured in another space.
    void add(const ChannelStats& stats);

    ColorSpace space() const noexcept { return space_; }
    std::uint64_t count() const noexcept { return count_; }

    /// Throws InsufficientSamples when fewer than two descriptors were added.
    StyleDistribution finish(DistributionFamily family) const;

private:
    ColorSpace space_;
    std::uint64_t count_ = 0;
    Vec3 mean_avg_{}, m2_avg_{};
    Vec3 mean_std_{}, m2_std_{};
};

StyleDistribution fit_style_distribution(std::span<const ChannelStats> stats,
                                         DistributionFamily family);

/// Class-aware subsampling. The class of a path is the name of its immediate
/// parent directory. Per class, `per_class` paths are drawn uniformly without
/// replacement (whole class when smaller); the result keeps input order.
std::vector<std::filesystem::path> subsample_corpus(std::span<const std::filesystem::path> paths,
                                                    std::size_t per_class, std::uint64_t seed);

struct StyleRecord {
    std::string path;
    ChannelStats stats;
};

/// Header `path,space,a1,a2,a3,d1,d2,d3` then one row per record. Returns the
/// number of data rows.
std::size_t export_style_csv(std::span<const StyleRecord> records, std::ostream& sink);

/// Inverse of export_style_csv. Throws Parse on malformed input.
std::vector<StyleRecord> read_style_csv(std::istream& source);

} // namespace stainforge
