// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace stainforge {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

enum class ColorSpace : std::uint8_t { Lab = 0, Hsv = 1, Hed = 2 };

inline constexpr std::array<ColorSpace, 3> kAllColorSpaces{
    ColorSpace::Lab, ColorSpace::Hsv, ColorSpace::Hed};

constexpr std::size_t index_of(ColorSpace space) noexcept {
    return static_cast<std::size_t>(space);
}

/// Lower-case tag used in files and on the command line ("lab", "hsv", "hed").
std::string_view to_string(ColorSpace space) noexcept;

/// Throws Error(InvalidArgument) on unknown names. Case-insensitive.
ColorSpace parse_color_space(std::string_view name);

/// 8-bit interleaved RGB raster, row-major.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(std::uint32_t width, std::uint32_t height);
    RgbImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data);

    std::uint32_t width() const noexcept { return width_; }
    std::uint32_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * height_;
    }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    const std::uint8_t* pixel(std::size_t index) const noexcept { return data_.data() + 3 * index; }
    std::uint8_t* pixel(std::size_t index) noexcept { return data_.data() + 3 * index; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::uint32_t width_ = 0;
    std::uint32_t height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Three real-valued planes in one working color space. Channels are stored
/// as separate planes; no kernel interleaves them.
struct PlaneImage {
    ColorSpace space = ColorSpace::Lab;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::array<std::vector<double>, 3> channels;

    PlaneImage() = default;
    PlaneImage(ColorSpace space, std::uint32_t width, std::uint32_t height);

    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * height;
    }
};

/// Result of converting planes back to 8-bit. A pixel counts as clamped when
/// any of its channels, before quantization, rounds outside [0, 255].
struct BackConversion {
    RgbImage image;
    std::size_t clamped_pixels = 0;

    double clamped_fraction() const noexcept {
        return image.pixel_count() == 0
                   ? 0.0
                   : static_cast<double>(clamped_pixels) / static_cast<double>(image.pixel_count());
    }
};

struct ChannelRange {
    double lo;
    double hi;
    double span() const noexcept { return hi - lo; }
};

/// Nominal value range of channel `channel` in `space`:
///   LAB  L [0,100], a/b [-128,127]
///   HSV  H [0,360], S [0,1], V [0,1]
///   HED  image of the optical-density cube [0, OD_MAX]^3 under deconvolution
ChannelRange channel_range(ColorSpace space, std::size_t channel);

// Optical density of the intensity floor (v = 1): -log10(1/255).
inline constexpr double kOdMax = 2.406540180433955;

/// Ruifrok-Johnston H, E, DAB optical-density vectors, each row unit length.
const Mat3& hed_stain_matrix();
/// Numerical inverse of hed_stain_matrix().
const Mat3& hed_unmixing_matrix();

PlaneImage rgb_to_lab(const RgbImage& img);
PlaneImage rgb_to_hsv(const RgbImage& img);
PlaneImage rgb_to_hed(const RgbImage& img);

BackConversion lab_to_rgb(const PlaneImage& planes);
BackConversion hsv_to_rgb(const PlaneImage& planes);
BackConversion hed_to_rgb(const PlaneImage& planes);

PlaneImage to_planes(const RgbImage& img, ColorSpace space);
BackConversion from_planes(const PlaneImage& planes);

/// Round half away from zero, then clamp to [0,255].
std::uint8_t quantize(double value) noexcept;

} // namespace stainforge
