// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>
#include <stainforge/pipeline.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace stainforge {

namespace {

// Mixed into the seed for the generator that draws a batch-shared template,
// keeping it apart from the per-item streams.
constexpr std::uint64_t kSharedTemplateTag = 0x5348415245445450ULL;

bool randomized_template(Mode m) { return m == Mode::RandStainNA || m == Mode::FixedSpace; }

SaConfig resolved_sa(const PipelineConfig& cfg) {
    const SaScheme scheme = cfg.mode == Mode::Sa1Baseline ? SaScheme::Sa1 : SaScheme::Sa2;
    if (cfg.sa) {
        if (cfg.sa->scheme != scheme)
            throw Error(ErrorCode::InvalidArgument, "SA config scheme does not match the mode");
        return *cfg.sa;
    }
    return SaConfig::preset(scheme, cfg.space, SaStrength::Light);
}

std::string missing(ColorSpace s) {
    return "no fitted distribution for color space " + std::string(to_string(s));
}

} // namespace

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
    case Mode::RandStainNA: return "randstainna";
    case Mode::FixedSpace: return "fixed";
    case Mode::SnBaseline: return "sn";
    case Mode::Sa1Baseline: return "sa1";
    case Mode::Sa2Baseline: return "sa2";
    case Mode::PassThrough: return "passthrough";
    }
    return "?";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::RandStainNA, Mode::FixedSpace, Mode::SnBaseline, Mode::Sa1Baseline,
                   Mode::Sa2Baseline, Mode::PassThrough})
        if (name == to_string(m)) return m;
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

const StyleDistribution& StatsSet::at(ColorSpace s) const {
    if (!has(s)) throw Error(ErrorCode::MissingDistribution, missing(s));
    return *by_space[index_of(s)];
}

void validate(const PipelineConfig& cfg) {
    for (ColorSpace s : kAllColorSpaces)
        if (cfg.distributions.has(s) && cfg.distributions.at(s).space != s)
            throw Error(ErrorCode::InvalidArgument, "distribution stored under the wrong color space");
    if (cfg.family_override && cfg.family_override->kind == DistributionFamily::Kind::StudentT &&
        !(cfg.family_override->dof > 2.0))
        throw Error(ErrorCode::InvalidArgument, "Student-t dof must be > 2");

    switch (cfg.mode) {
    case Mode::RandStainNA: {
        double sum = 0.0;
        for (double p : cfg.space_probs) {
            if (!std::isfinite(p) || p < 0.0)
                throw Error(ErrorCode::InvalidArgument, "space probabilities must be finite and >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "space probabilities must sum to 1");
        for (ColorSpace s : kAllColorSpaces)
            if (cfg.space_probs[index_of(s)] > 0.0 && !cfg.distributions.has(s))
                throw Error(ErrorCode::MissingDistribution, missing(s));
        break;
    }
    case Mode::FixedSpace:
        if (!cfg.distributions.has(cfg.space)) throw Error(ErrorCode::MissingDistribution, missing(cfg.space));
        break;
    case Mode::SnBaseline:
        if (cfg.sn_template) {
            if (cfg.sn_template->space != cfg.space)
                throw Error(ErrorCode::InvalidArgument, "SN template measured in a different space");
        } else if (!cfg.distributions.has(cfg.space)) {
            throw Error(ErrorCode::MissingDistribution, missing(cfg.space));
        }
        break;
    case Mode::Sa1Baseline:
    case Mode::Sa2Baseline:
        validate(resolved_sa(cfg));
        if (cfg.sa && cfg.sa->space != cfg.space)
            throw Error(ErrorCode::InvalidArgument, "SA config space does not match the pipeline space");
        break;
    case Mode::PassThrough:
        break;
    }
}

ColorSpace select_color_space(const std::array<double, 3>& probs, Rng& rng) {
    const double u = rng.uniform(0.0, 1.0);
    double cumulative = 0.0;
    std::optional<ColorSpace> last;
    for (ColorSpace s : kAllColorSpaces) {
        const double p = probs[index_of(s)];
        if (!(p > 0.0)) continue;
        cumulative += p;
        last = s;
        if (u < cumulative) return s;
    }
    if (!last) throw Error(ErrorCode::InvalidArgument, "all space probabilities are zero");
    return *last;   // u landed in the rounding slack above the final cumulative sum
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    if (cfg_.mode == Mode::Sa1Baseline || cfg_.mode == Mode::Sa2Baseline) cfg_.sa = resolved_sa(cfg_);
    if (cfg_.mode == Mode::SnBaseline && !cfg_.sn_template)
        cfg_.sn_template = cfg_.distributions.at(cfg_.space).mean_template();
    for (ColorSpace s : kAllColorSpaces) {
        if (!cfg_.distributions.has(s)) continue;
        StyleDistribution d = cfg_.distributions.at(s);
        if (cfg_.family_override) d.family = *cfg_.family_override;
        effective_[index_of(s)] = d;
    }
}

VirtualTemplate Pipeline::draw(Rng& rng) const {
    const ColorSpace space =
        cfg_.mode == Mode::RandStainNA ? select_color_space(cfg_.space_probs, rng) : cfg_.space;
    const auto& dist = effective_[index_of(space)];
    if (!dist) throw Error(ErrorCode::MissingDistribution, missing(space));
    return sample_template(*dist, rng);
}

NormalizeOutcome Pipeline::apply_with(const RgbImage& img, const VirtualTemplate& t) const {
    return normalize_to_template(img, t);
}

NormalizeOutcome Pipeline::transform(const RgbImage& img, Rng& rng) const {
    if (img.width() == 0 || img.height() == 0)
        throw Error(ErrorCode::InvalidArgument, "image must have nonzero width and height");
    switch (cfg_.mode) {
    case Mode::PassThrough:
        return {img, std::nullopt, 0.0};
    case Mode::RandStainNA:
    case Mode::FixedSpace:
        return apply_with(img, draw(rng));
    case Mode::SnBaseline:
        return apply_with(img, VirtualTemplate::from_stats(*cfg_.sn_template));
    case Mode::Sa1Baseline: {
        AugmentOutcome a = sa1(img, *cfg_.sa, rng);
        return {std::move(a.image), std::nullopt, a.clamped_fraction};
    }
    case Mode::Sa2Baseline: {
        AugmentOutcome a = sa2(img, *cfg_.sa, rng);
        return {std::move(a.image), std::nullopt, a.clamped_fraction};
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown mode");
}

NormalizeOutcome Pipeline::transform_item(const RgbImage& img, std::uint64_t item_index) const {
    Rng rng = Rng::derive(cfg_.seed, item_index);
    return transform(img, rng);
}

std::vector<NormalizeOutcome> Pipeline::transform_batch(std::span<const RgbImage> imgs,
                                                        std::uint64_t first_index,
                                                        unsigned workers) const {
    if (imgs.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");

    std::optional<VirtualTemplate> shared;
    if (cfg_.batch_shared_template && randomized_template(cfg_.mode)) {
        Rng rng = Rng::derive(cfg_.seed ^ kSharedTemplateTag, first_index);
        shared = draw(rng);
    }

    std::vector<NormalizeOutcome> out(imgs.size());
    std::vector<std::exception_ptr> errors(imgs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < imgs.size(); i = next.fetch_add(1)) {
            try {
                if (shared) {
                    if (imgs[i].width() == 0 || imgs[i].height() == 0)
                        throw Error(ErrorCode::InvalidArgument, "image must have nonzero width and height");
                    out[i] = apply_with(imgs[i], *shared);
                } else {
                    out[i] = transform_item(imgs[i], first_index + i);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, imgs.size());
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
            throw BatchItemError(i, e);
        }
    }
    return out;
}

} // namespace stainforge
