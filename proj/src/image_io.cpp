// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "nervkit/common.hpp"

namespace nervkit {

namespace fs = std::filesystem;

namespace {
bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".ppm";
}
}  // namespace

VideoTensor ingest_frames(const std::string& directory, double frame_rate) {
    if (!fs::is_directory(directory)) throw DataError("not a directory: " + directory);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(directory))
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    if (files.empty()) throw DataError("no decodable image files in " + directory);
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    Tensor frames;
    std::int64_t h = 0, w = 0;
    std::string first_file;
    for (std::size_t i = 0; i < files.size(); ++i) {
        cv::Mat img = cv::imread(files[i].string(), cv::IMREAD_COLOR);
        if (img.empty()) throw DataError("cannot decode image: " + files[i].string());
        if (i == 0) {
            h = img.rows;
            w = img.cols;
            first_file = files[i].filename().string();
            frames = Tensor({static_cast<std::int64_t>(files.size()), h, w, 3});
        } else if (img.rows != h || img.cols != w) {
            throw DataError("frame size mismatch: " + first_file + " is " + std::to_string(h) + "x" +
                            std::to_string(w) + " but " + files[i].filename().string() + " is " +
                            std::to_string(img.rows) + "x" + std::to_string(img.cols));
        }
        double* dst = frames.data() + static_cast<std::int64_t>(i) * h * w * 3;
        for (std::int64_t y = 0; y < h; ++y) {
            const cv::Vec3b* row = img.ptr<cv::Vec3b>(static_cast<int>(y));
            for (std::int64_t x = 0; x < w; ++x) {
                // OpenCV loads BGR.
                dst[(y * w + x) * 3 + 0] = row[x][2] / 255.0;
                dst[(y * w + x) * 3 + 1] = row[x][1] / 255.0;
                dst[(y * w + x) * 3 + 2] = row[x][0] / 255.0;
            }
        }
    }
    VideoTensor out;
    out.frames = std::move(frames);
    out.frame_rate = frame_rate;
    out.name = fs::path(directory).filename().string();
    out.validate();
    return out;
}

namespace {
cv::Mat chw_to_mat(const Tensor& chw) {
    if (chw.rank() != 3 || chw.dim(0) != 3) throw ContractViolation("expected a (3,H,W) frame");
    const std::int64_t h = chw.dim(1), w = chw.dim(2);
    cv::Mat img(static_cast<int>(h), static_cast<int>(w), CV_8UC3);
    for (std::int64_t y = 0; y < h; ++y) {
        cv::Vec3b* row = img.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::int64_t x = 0; x < w; ++x) {
            auto to_byte = [](double v) {
                return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            };
            row[x][2] = to_byte(chw[(0 * h + y) * w + x]);
            row[x][1] = to_byte(chw[(1 * h + y) * w + x]);
            row[x][0] = to_byte(chw[(2 * h + y) * w + x]);
        }
    }
    return img;
}
}  // namespace

void write_frame_png(const std::string& path, const Tensor& chw) {
    if (!cv::imwrite(path, chw_to_mat(chw))) throw DataError("cannot write image: " + path);
}

std::vector<std::string> write_frames(const std::string& directory, const VideoTensor& video,
                                      const std::string& prefix) {
    fs::create_directories(directory);
    std::vector<std::string> paths;
    for (std::int64_t t = 0; t < video.num_frames(); ++t) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s%05lld.png", prefix.c_str(), static_cast<long long>(t));
        std::string path = (fs::path(directory) / name).string();
        write_frame_png(path, video.frame_chw(t));
        paths.push_back(path);
    }
    return paths;
}

void write_map_png(const std::string& path, const Tensor& map_hw, bool diverging, double scale) {
    if (map_hw.rank() != 2) throw ContractViolation("write_map_png: expected (H,W)");
    const std::int64_t h = map_hw.dim(0), w = map_hw.dim(1);
    double norm = scale;
    if (norm <= 0.0) norm = diverging ? map_hw.abs_max() : map_hw.max();
    if (norm <= 0.0) norm = 1.0;
    cv::Mat img(static_cast<int>(h), static_cast<int>(w), CV_8UC3);
    for (std::int64_t y = 0; y < h; ++y) {
        cv::Vec3b* row = img.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::int64_t x = 0; x < w; ++x) {
            double v = map_hw[y * w + x] / norm;
            double r, g, b;
            if (diverging) {
                // blue (negative) - white - red (positive)
                v = std::clamp(v, -1.0, 1.0);
                if (v >= 0) {
                    r = 1.0;
                    g = 1.0 - v;
                    b = 1.0 - v;
                } else {
                    r = 1.0 + v;
                    g = 1.0 + v;
                    b = 1.0;
                }
            } else {
                v = std::clamp(v, 0.0, 1.0);
                r = 1.0 - 0.55 * v;
                g = 1.0 - 0.85 * v;
                b = 1.0 - 0.25 * v;
            }
            row[x][2] = static_cast<unsigned char>(std::lround(r * 255.0));
            row[x][1] = static_cast<unsigned char>(std::lround(g * 255.0));
            row[x][0] = static_cast<unsigned char>(std::lround(b * 255.0));
        }
    }
    if (!cv::imwrite(path, img)) throw DataError("cannot write image: " + path);
}

}  // namespace nervkit
