// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>
#include <stainforge/normalizer.hpp>

namespace stainforge {

namespace {

NormalizeOutcome finish(const PlaneImage& aligned, const VirtualTemplate& target) {
    BackConversion back = from_planes(aligned);
    const double fraction = back.clamped_fraction();
    return {std::move(back.image), target, fraction};
}

} // namespace

PlaneImage align_moments(const PlaneImage& planes, const ChannelStats& source,
                         const VirtualTemplate& target) {
    if (planes.space != target.space || source.space != target.space)
        throw Error(ErrorCode::InvalidArgument, "planes, source stats and template must share a space");
    PlaneImage out = planes;
    for (std::size_t c = 0; c < 3; ++c) {
        const double scale = source.std[c] > 0.0 ? target.std[c] / source.std[c] : 1.0;
        const double src_mean = source.avg[c];
        const double dst_mean = target.avg[c];
        for (double& p : out.channels[c]) p = scale * (p - src_mean) + dst_mean;
    }
    return out;
}

NormalizeOutcome normalize_to_template(const RgbImage& img, const VirtualTemplate& target) {
    const PlaneImage planes = to_planes(img, target.space);
    return finish(align_moments(planes, channel_stats(planes), target), target);
}

NormalizeOutcome normalize_to_template(const RgbImage& img, const VirtualTemplate& target,
                                       const ChannelStats& precomputed_source) {
    const PlaneImage planes = to_planes(img, target.space);
    return finish(align_moments(planes, precomputed_source, target), target);
}

NormalizeOutcome reinhard_normalize(const RgbImage& img, const RgbImage& template_img,
                                    ColorSpace space) {
    const ChannelStats reference = channel_stats(to_planes(template_img, space));
    return normalize_to_template(img, VirtualTemplate::from_stats(reference));
}

} // namespace stainforge
