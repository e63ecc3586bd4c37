// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/synthetic.hpp"

#include <cmath>

#include "nervkit/rng.hpp"

namespace nervkit {

VideoTensor make_synthetic_video(std::int64_t frames, std::int64_t height, std::int64_t width, std::uint64_t seed,
                                 const std::string& name) {
    Rng rng(seed);
    const double phase_r = rng.uniform(0.0, 2.0 * M_PI);
    const double phase_g = rng.uniform(0.0, 2.0 * M_PI);
    const double phase_b = rng.uniform(0.0, 2.0 * M_PI);
    const double freq_x = rng.uniform(1.0, 3.0);
    const double freq_y = rng.uniform(1.0, 3.0);
    const double blob_size = rng.uniform(0.05, 0.15);

    Tensor data({frames, height, width, 3});
    for (std::int64_t f = 0; f < frames; ++f) {
        double t = frames > 1 ? static_cast<double>(f) / static_cast<double>(frames - 1) : 0.0;
        // Two blobs orbiting in opposite directions.
        double cx1 = 0.5 + 0.3 * std::cos(2.0 * M_PI * (t + 0.13));
        double cy1 = 0.5 + 0.3 * std::sin(2.0 * M_PI * (t + 0.13));
        double cx2 = 0.5 + 0.25 * std::cos(-2.0 * M_PI * (t + 0.61));
        double cy2 = 0.5 + 0.25 * std::sin(-2.0 * M_PI * (t + 0.61));
        for (std::int64_t y = 0; y < height; ++y) {
            double v = static_cast<double>(y) / std::max<std::int64_t>(height - 1, 1);
            for (std::int64_t x = 0; x < width; ++x) {
                double u = static_cast<double>(x) / std::max<std::int64_t>(width - 1, 1);
                double g1 = std::exp(-((u - cx1) * (u - cx1) + (v - cy1) * (v - cy1)) / (2.0 * blob_size * blob_size));
                double g2 = std::exp(-((u - cx2) * (u - cx2) + (v - cy2) * (v - cy2)) / (2.0 * blob_size * blob_size));
                double base_r = 0.5 + 0.2 * std::sin(2.0 * M_PI * (freq_x * u + t) + phase_r);
                double base_g = 0.5 + 0.2 * std::sin(2.0 * M_PI * (freq_y * v - t) + phase_g);
                double base_b = 0.5 + 0.2 * std::sin(2.0 * M_PI * (u + v + 0.5 * t) + phase_b);
                double* px = data.data() + ((f * height + y) * width + x) * 3;
                px[0] = std::clamp(base_r + 0.4 * g1 - 0.25 * g2, 0.0, 1.0);
                px[1] = std::clamp(base_g + 0.3 * g2 - 0.2 * g1, 0.0, 1.0);
                px[2] = std::clamp(base_b + 0.25 * (g1 + g2) * 0.5, 0.0, 1.0);
            }
        }
    }
    VideoTensor out;
    out.frames = std::move(data);
    out.frame_rate = 30.0;
    out.name = name;
    return out;
}

std::vector<VideoTensor> make_synthetic_clips(int count, int clip_frames, std::int64_t height, std::int64_t width,
                                              std::uint64_t seed) {
    std::vector<VideoTensor> clips;
    clips.reserve(count);
    for (int i = 0; i < count; ++i)
        clips.push_back(make_synthetic_video(clip_frames, height, width, seed + 1000 + i,
                                             "clip-" + std::to_string(i)));
    return clips;
}

}  // namespace nervkit
