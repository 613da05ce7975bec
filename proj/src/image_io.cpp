// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>
#include <stainforge/image_io.hpp>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

namespace stainforge {

namespace fs = std::filesystem;

RgbImage load_image(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    cv::Mat bgr;
    try {
        bgr = cv::imdecode(bytes, cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::Decode, "cannot decode " + path.string() + ": " + e.what());
    }
    if (bgr.empty() || bgr.type() != CV_8UC3)
        throw Error(ErrorCode::Decode, "cannot decode " + path.string());

    RgbImage img(static_cast<std::uint32_t>(bgr.cols), static_cast<std::uint32_t>(bgr.rows));
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            std::uint8_t* p = img.pixel(static_cast<std::size_t>(y) * bgr.cols + x);
            p[0] = row[x][2];
            p[1] = row[x][1];
            p[2] = row[x][0];
        }
    }
    return img;
}

void save_png(const RgbImage& img, const fs::path& path) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "cannot save an empty image");
    cv::Mat bgr(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
    for (int y = 0; y < bgr.rows; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            const std::uint8_t* p = img.pixel(static_cast<std::size_t>(y) * bgr.cols + x);
            row[x] = cv::Vec3b(p[2], p[1], p[0]);
        }
    }
    std::vector<std::uint8_t> encoded;
    try {
        if (!cv::imencode(".png", bgr, encoded))
            throw Error(ErrorCode::Io, "PNG encoding failed for " + path.string());
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::Io, "PNG encoding failed for " + path.string() + ": " + e.what());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(encoded.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

bool has_image_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" || ext == ".tiff";
}

std::vector<fs::path> scan_images(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw Error(ErrorCode::Io, "not a readable directory: " + root.string());
    std::vector<fs::path> out;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot read directory " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw Error(ErrorCode::Io, "cannot read directory " + root.string() + ": " + ec.message());
        if (it->is_regular_file(ec) && has_image_extension(it->path())) out.push_back(it->path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
    return out;
}

} // namespace stainforge
