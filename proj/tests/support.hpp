// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

// Fixtures shared by the test executables.

#pragma once

#include <stainforge/colorspace.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace sftest {

using stainforge::RgbImage;

inline RgbImage noise_image(std::uint32_t w, std::uint32_t h, std::uint64_t seed, int lo = 0, int hi = 255) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(lo, hi);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    for (auto& v : px) v = static_cast<std::uint8_t>(d(rng));
    return RgbImage(w, h, std::move(px));
}

inline RgbImage constant_image(std::uint32_t w, std::uint32_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::vector<std::uint8_t> px;
    px.reserve(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
        px.push_back(r);
        px.push_back(g);
        px.push_back(b);
    }
    return RgbImage(w, h, std::move(px));
}

// Pink stroma with purple nuclei, a per-image stain tint and pixel noise.
// Stays away from the 0/255 rails so conversions are well conditioned.
inline RgbImage he_image(std::uint32_t w, std::uint32_t h, std::uint64_t seed, double tint = 12.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 7.0);
    double shift[3];
    for (double& s : shift) s = tint * (2.0 * unit(rng) - 1.0);
    const double stroma[3] = {220.0 + shift[0], 150.0 + shift[1], 195.0 + shift[2]};
    const double nucleus[3] = {105.0 + shift[0], 65.0 + shift[1], 150.0 + shift[2]};
    struct Blob {
        double x, y, r;
    };
    std::vector<Blob> blobs(1 + (w * h) / 300);
    for (auto& b : blobs) b = {unit(rng) * w, unit(rng) * h, 2.0 + 5.0 * unit(rng)};
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            bool in = false;
            for (const auto& b : blobs)
                if ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) < b.r * b.r) in = true;
            const double* base = in ? nucleus : stroma;
            for (int c = 0; c < 3; ++c)
                px[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
                    static_cast<std::uint8_t>(std::lround(std::clamp(base[c] + noise(rng), 12.0, 250.0)));
        }
    return RgbImage(w, h, std::move(px));
}

inline int max_abs_diff(const RgbImage& a, const RgbImage& b) {
    int worst = 0;
    const auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, std::abs(int(da[i]) - int(db[i])));
    return worst;
}

// Deterministic sample of the RGB cube: a stride walk over all 2^24 triples.
inline RgbImage grid_image(std::size_t n_pixels, int min_value = 0) {
    std::vector<std::uint8_t> px;
    px.reserve(n_pixels * 3);
    const std::uint32_t span = 256 - min_value;
    const std::uint64_t total = std::uint64_t(span) * span * span;
    const std::uint64_t stride = 2654435761ULL % total | 1;
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < n_pixels; ++i, k = (k + stride) % total) {
        px.push_back(static_cast<std::uint8_t>(min_value + k % span));
        px.push_back(static_cast<std::uint8_t>(min_value + (k / span) % span));
        px.push_back(static_cast<std::uint8_t>(min_value + k / (std::uint64_t(span) * span)));
    }
    return RgbImage(static_cast<std::uint32_t>(n_pixels), 1, std::move(px));
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("stainforge-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::permissions(path_, std::filesystem::perms::owner_all,
                                     std::filesystem::perm_options::add, ec);
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

} // namespace sftest
