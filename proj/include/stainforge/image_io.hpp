// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/colorspace.hpp>

#include <filesystem>
#include <vector>

namespace stainforge {

/// PNG, JPEG or TIFF, decoded to 8-bit RGB. Throws Io when the file cannot be
/// read and Decode when its contents are not a supported image.
RgbImage load_image(const std::filesystem::path& path);

/// Lossless PNG. Throws Io on failure.
void save_png(const RgbImage& img, const std::filesystem::path& path);

/// .png .jpg .jpeg .tif .tiff, case-insensitive.
bool has_image_extension(const std::filesystem::path& path);

/// Regular files with an image extension below `root`, recursively, sorted by
/// their generic path string. Throws Io when `root` is not a readable directory.
std::vector<std::filesystem::path> scan_images(const std::filesystem::path& root);

} // namespace stainforge
