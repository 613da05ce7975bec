// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/colorspace.hpp>
#include <stainforge/error.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace stainforge {

namespace {

// sRGB primaries to XYZ (D65).
constexpr Mat3 kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

// CIE constants in exact rational form.
constexpr double kLabDelta = 6.0 / 29.0;
constexpr double kLabEpsilon = kLabDelta * kLabDelta * kLabDelta;

Mat3 invert(const Mat3& m) {
    const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    const double inv = 1.0 / det;
    Mat3 r{};
    r[0][0] = c00 * inv;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv;
    r[1][0] = c01 * inv;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv;
    r[2][0] = c02 * inv;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv;
    return r;
}

struct LabTables {
    Mat3 xyz_to_rgb;
    Vec3 white;                       // row sums of kRgbToXyz, so grey maps to a = b = 0
    std::array<double, 256> linear;   // sRGB decode of each 8-bit code

    LabTables() : xyz_to_rgb(invert(kRgbToXyz)) {
        for (std::size_t i = 0; i < 3; ++i)
            white[i] = kRgbToXyz[i][0] + kRgbToXyz[i][1] + kRgbToXyz[i][2];
        for (int v = 0; v < 256; ++v) {
            const double c = v / 255.0;
            linear[v] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
        }
    }
};

const LabTables& lab_tables() {
    static const LabTables tables;
    return tables;
}

double lab_f(double t) {
    return t > kLabEpsilon ? std::cbrt(t) : t / (3.0 * kLabDelta * kLabDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kLabDelta ? t * t * t : 3.0 * kLabDelta * kLabDelta * (t - 4.0 / 29.0);
}

double srgb_encode(double linear) {
    return linear <= 0.0031308 ? 12.92 * linear : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

struct HedTables {
    Mat3 stains;
    Mat3 unmixing;
    std::array<double, 256> od;   // -log10(max(v,1)/255)
    std::array<ChannelRange, 3> ranges;

    HedTables() {
        const Mat3 raw{{
            {0.65, 0.70, 0.29},
            {0.07, 0.99, 0.11},
            {0.27, 0.57, 0.78},
        }};
        for (std::size_t r = 0; r < 3; ++r) {
            const double norm = std::sqrt(raw[r][0] * raw[r][0] + raw[r][1] * raw[r][1] +
                                          raw[r][2] * raw[r][2]);
            for (std::size_t c = 0; c < 3; ++c) stains[r][c] = raw[r][c] / norm;
        }
        unmixing = invert(stains);
        for (int v = 0; v < 256; ++v) od[v] = -std::log10(std::max(v, 1) / 255.0);
        for (std::size_t j = 0; j < 3; ++j) {
            double lo = 0.0, hi = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                lo += std::min(0.0, unmixing[c][j]) * kOdMax;
                hi += std::max(0.0, unmixing[c][j]) * kOdMax;
            }
            ranges[j] = {lo, hi};
        }
    }
};

const HedTables& hed_tables() {
    static const HedTables tables;
    return tables;
}

void require_valid(const RgbImage& img) {
    if (img.width() == 0 || img.height() == 0)
        throw Error(ErrorCode::InvalidArgument, "image must have nonzero width and height");
}

void require_space(const PlaneImage& planes, ColorSpace expected) {
    if (planes.space != expected)
        throw Error(ErrorCode::InvalidArgument,
                    "expected " + std::string(to_string(expected)) + " planes, got " +
                        std::string(to_string(planes.space)));
    const std::size_t n = planes.pixel_count();
    if (n == 0 || planes.channels[0].size() != n || planes.channels[1].size() != n ||
        planes.channels[2].size() != n)
        throw Error(ErrorCode::InvalidArgument, "plane sizes do not match image dimensions");
}

// Writes three pre-quantization values (0..255 scale) into the image,
// returning true when any of them had to be clipped.
bool store(std::uint8_t* out, double r, double g, double b) {
    const auto outside = [](double v) { return !(v >= -0.5 && v < 255.5); };
    out[0] = quantize(r);
    out[1] = quantize(g);
    out[2] = quantize(b);
    return outside(r) || outside(g) || outside(b);
}

} // namespace

std::string_view to_string(ColorSpace space) noexcept {
    switch (space) {
    case ColorSpace::Lab: return "lab";
    case ColorSpace::Hsv: return "hsv";
    case ColorSpace::Hed: return "hed";
    }
    return "?";
}

ColorSpace parse_color_space(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (ColorSpace s : kAllColorSpaces)
        if (lower == to_string(s)) return s;
    throw Error(ErrorCode::InvalidArgument, "unknown color space '" + std::string(name) + "'");
}

RgbImage::RgbImage(std::uint32_t width, std::uint32_t height)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3, 0) {}

RgbImage::RgbImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(ErrorCode::InvalidArgument, "pixel buffer length must be width*height*3");
}

PlaneImage::PlaneImage(ColorSpace space_, std::uint32_t width_, std::uint32_t height_)
    : space(space_), width(width_), height(height_) {
    for (auto& ch : channels) ch.assign(pixel_count(), 0.0);
}

std::uint8_t quantize(double value) noexcept {
    if (!(value > 0.0)) return 0;   // also maps NaN to 0
    if (value >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::floor(value + 0.5));
}

ChannelRange channel_range(ColorSpace space, std::size_t channel) {
    if (channel > 2) throw Error(ErrorCode::InvalidArgument, "channel index out of range");
    switch (space) {
    case ColorSpace::Lab:
        return channel == 0 ? ChannelRange{0.0, 100.0} : ChannelRange{-128.0, 127.0};
    case ColorSpace::Hsv:
        return channel == 0 ? ChannelRange{0.0, 360.0} : ChannelRange{0.0, 1.0};
    case ColorSpace::Hed:
        return hed_tables().ranges[channel];
    }
    throw Error(ErrorCode::InvalidArgument, "unknown color space");
}

const Mat3& hed_stain_matrix() { return hed_tables().stains; }
const Mat3& hed_unmixing_matrix() { return hed_tables().unmixing; }

PlaneImage rgb_to_lab(const RgbImage& img) {
    require_valid(img);
    const LabTables& t = lab_tables();
    PlaneImage out(ColorSpace::Lab, img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const std::uint8_t* p = img.pixel(i);
        const double r = t.linear[p[0]], g = t.linear[p[1]], b = t.linear[p[2]];
        const double x = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
        const double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
        const double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;
        const double fx = lab_f(x / t.white[0]);
        const double fy = lab_f(y / t.white[1]);
        const double fz = lab_f(z / t.white[2]);
        out.channels[0][i] = 116.0 * fy - 16.0;
        out.channels[1][i] = 500.0 * (fx - fy);
        out.channels[2][i] = 200.0 * (fy - fz);
    }
    return out;
}

BackConversion lab_to_rgb(const PlaneImage& planes) {
    require_space(planes, ColorSpace::Lab);
    const LabTables& t = lab_tables();
    const Mat3& m = t.xyz_to_rgb;
    BackConversion out{RgbImage(planes.width, planes.height), 0};
    for (std::size_t i = 0; i < planes.pixel_count(); ++i) {
        const double fy = (planes.channels[0][i] + 16.0) / 116.0;
        const double fx = fy + planes.channels[1][i] / 500.0;
        const double fz = fy - planes.channels[2][i] / 200.0;
        const double x = lab_f_inv(fx) * t.white[0];
        const double y = lab_f_inv(fy) * t.white[1];
        const double z = lab_f_inv(fz) * t.white[2];
        const double r = m[0][0] * x + m[0][1] * y + m[0][2] * z;
        const double g = m[1][0] * x + m[1][1] * y + m[1][2] * z;
        const double b = m[2][0] * x + m[2][1] * y + m[2][2] * z;
        if (store(out.image.pixel(i), 255.0 * srgb_encode(r), 255.0 * srgb_encode(g),
                  255.0 * srgb_encode(b)))
            ++out.clamped_pixels;
    }
    return out;
}

PlaneImage rgb_to_hsv(const RgbImage& img) {
    require_valid(img);
    PlaneImage out(ColorSpace::Hsv, img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const std::uint8_t* p = img.pixel(i);
        const double r = p[0] / 255.0, g = p[1] / 255.0, b = p[2] / 255.0;
        const double hi = std::max({r, g, b});
        const double lo = std::min({r, g, b});
        const double d = hi - lo;
        double h = 0.0;
        if (d > 0.0) {
            if (hi == r)
                h = 60.0 * ((g - b) / d);
            else if (hi == g)
                h = 60.0 * ((b - r) / d + 2.0);
            else
                h = 60.0 * ((r - g) / d + 4.0);
            if (h < 0.0) h += 360.0;
        }
        out.channels[0][i] = h;
        out.channels[1][i] = hi > 0.0 ? d / hi : 0.0;
        out.channels[2][i] = hi;
    }
    return out;
}

BackConversion hsv_to_rgb(const PlaneImage& planes) {
    require_space(planes, ColorSpace::Hsv);
    BackConversion out{RgbImage(planes.width, planes.height), 0};
    for (std::size_t i = 0; i < planes.pixel_count(); ++i) {
        // Hue is periodic; S and V are left unclamped so out-of-range values
        // surface as clipped RGB.
        double h = std::fmod(planes.channels[0][i], 360.0);
        if (h < 0.0) h += 360.0;
        if (!(h < 360.0)) h = 0.0;
        const double s = planes.channels[1][i];
        const double v = planes.channels[2][i];
        const double hp = h / 60.0;
        const int sector = std::min(static_cast<int>(hp), 5);
        const double f = hp - sector;
        const double pv = v * (1.0 - s);
        const double qv = v * (1.0 - s * f);
        const double tv = v * (1.0 - s * (1.0 - f));
        double r = 0, g = 0, b = 0;
        switch (sector) {
        case 0: r = v; g = tv; b = pv; break;
        case 1: r = qv; g = v; b = pv; break;
        case 2: r = pv; g = v; b = tv; break;
        case 3: r = pv; g = qv; b = v; break;
        case 4: r = tv; g = pv; b = v; break;
        default: r = v; g = pv; b = qv; break;
        }
        if (store(out.image.pixel(i), 255.0 * r, 255.0 * g, 255.0 * b)) ++out.clamped_pixels;
    }
    return out;
}

PlaneImage rgb_to_hed(const RgbImage& img) {
    require_valid(img);
    const HedTables& t = hed_tables();
    const Mat3& u = t.unmixing;
    PlaneImage out(ColorSpace::Hed, img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const std::uint8_t* p = img.pixel(i);
        const double r = t.od[p[0]], g = t.od[p[1]], b = t.od[p[2]];
        for (std::size_t j = 0; j < 3; ++j)
            out.channels[j][i] = r * u[0][j] + g * u[1][j] + b * u[2][j];
    }
    return out;
}

BackConversion hed_to_rgb(const PlaneImage& planes) {
    require_space(planes, ColorSpace::Hed);
    const Mat3& m = hed_tables().stains;
    BackConversion out{RgbImage(planes.width, planes.height), 0};
    for (std::size_t i = 0; i < planes.pixel_count(); ++i) {
        const double h = planes.channels[0][i];
        const double e = planes.channels[1][i];
        const double d = planes.channels[2][i];
        double rgb[3];
        for (std::size_t c = 0; c < 3; ++c) {
            const double od = h * m[0][c] + e * m[1][c] + d * m[2][c];
            rgb[c] = 255.0 * std::pow(10.0, -od);
        }
        if (store(out.image.pixel(i), rgb[0], rgb[1], rgb[2])) ++out.clamped_pixels;
    }
    return out;
}

PlaneImage to_planes(const RgbImage& img, ColorSpace space) {
    switch (space) {
    case ColorSpace::Lab: return rgb_to_lab(img);
    case ColorSpace::Hsv: return rgb_to_hsv(img);
    case ColorSpace::Hed: return rgb_to_hed(img);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown color space");
}

BackConversion from_planes(const PlaneImage& planes) {
    switch (planes.space) {
    case ColorSpace::Lab: return lab_to_rgb(planes);
    case ColorSpace::Hsv: return hsv_to_rgb(planes);
    case ColorSpace::Hed: return hed_to_rgb(planes);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown color space");
}

} // namespace stainforge
