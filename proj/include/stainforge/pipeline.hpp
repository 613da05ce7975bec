// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/augmenters.hpp>
#include <stainforge/normalizer.hpp>

#include <optional>
#include <span>
#include <vector>

namespace stainforge {

enum class Mode { RandStainNA, FixedSpace, SnBaseline, Sa1Baseline, Sa2Baseline, PassThrough };

std::string_view to_string(Mode mode) noexcept;
/// "randstainna" | "fixed" | "sn" | "sa1" | "sa2" | "passthrough".
Mode parse_mode(std::string_view name);

/// Fitted distributions indexed by color space.
struct StatsSet {
    std::array<std::optional<StyleDistribution>, 3> by_space;

    bool has(ColorSpace s) const noexcept { return by_space[index_of(s)].has_value(); }
    const StyleDistribution& at(ColorSpace s) const;
    void put(StyleDistribution d) { by_space[index_of(d.space)] = std::move(d); }
    bool empty() const noexcept { return !has(ColorSpace::Lab) && !has(ColorSpace::Hsv) && !has(ColorSpace::Hed); }
};

struct PipelineConfig {
    Mode mode = Mode::RandStainNA;
    std::array<double, 3> space_probs{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    StatsSet distributions;
    std::optional<DistributionFamily> family_override;
    std::uint64_t seed = 0;

    /// Working space for FixedSpace, SnBaseline and the SA modes.
    ColorSpace space = ColorSpace::Lab;
    /// SN target; defaults to the mean template of distributions[space].
    std::optional<ChannelStats> sn_template;
    /// SA noise; defaults to the Light preset of the mode's scheme in `space`.
    std::optional<SaConfig> sa;

    /// When set, transform_batch draws one (space, template) per batch instead
    /// of one per item.
    bool batch_shared_template = false;
};

/// Throws InvalidArgument for malformed probabilities and
/// MissingDistribution when a selectable space has no fit.
void validate(const PipelineConfig& cfg);

/// Categorical draw; spaces with probability 0 are never returned.
ColorSpace select_color_space(const std::array<double, 3>& probs, Rng& rng);

class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg);

    const PipelineConfig& config() const noexcept { return cfg_; }

    /// One image. Consumes randomness from `rng` so that consecutive calls
    /// see fresh templates.
    NormalizeOutcome transform(const RgbImage& img, Rng& rng) const;

    /// transform(img, Rng::derive(seed, item_index)).
    NormalizeOutcome transform_item(const RgbImage& img, std::uint64_t item_index) const;

    /// Item i uses Rng::derive(seed, first_index + i); results are identical
    /// for every worker count. Failures are rethrown as BatchItemError.
    std::vector<NormalizeOutcome> transform_batch(std::span<const RgbImage> imgs,
                                                  std::uint64_t first_index = 0,
                                                  unsigned workers = 1) const;

    /// (space, template) pair the pipeline would use for a randomized mode.
    VirtualTemplate draw(Rng& rng) const;

private:
    NormalizeOutcome apply_with(const RgbImage& img, const VirtualTemplate& t) const;

    PipelineConfig cfg_;
    std::array<std::optional<StyleDistribution>, 3> effective_;   // family override applied
};

} // namespace stainforge
