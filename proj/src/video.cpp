// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/video.hpp"

#include <algorithm>
#include <cmath>

#include "nervkit/common.hpp"

namespace nervkit {

VideoTensor::VideoTensor(Tensor f, double fps, std::string n)
    : frames(std::move(f)), frame_rate(fps), name(std::move(n)) {
    validate();
}

void VideoTensor::validate() const {
    if (frames.rank() != 4 || frames.dim(3) != 3)
        throw ContractViolation("VideoTensor: expected shape (T,H,W,3), got " + frames.shape_str());
    if (frames.dim(0) < 1 || frames.dim(1) < 1 || frames.dim(2) < 1)
        throw ContractViolation("VideoTensor: T, H, W must all be >= 1");
    for (std::int64_t i = 0; i < frames.numel(); ++i) {
        double v = frames[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ContractViolation("VideoTensor: value out of [0,1] at flat index " + std::to_string(i));
    }
}

Tensor VideoTensor::frame_chw(std::int64_t t) const {
    std::int64_t h = height(), w = width();
    if (t < 0 || t >= num_frames()) throw ContractViolation("frame_chw: index out of range");
    Tensor out({3, h, w});
    const double* src = frames.data() + t * h * w * 3;
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            const double* px = src + (y * w + x) * 3;
            for (int c = 0; c < 3; ++c) out[(c * h + y) * w + x] = px[c];
        }
    return out;
}

void VideoTensor::set_frame_chw(std::int64_t t, const Tensor& chw, bool clamp) {
    std::int64_t h = height(), w = width();
    if (t < 0 || t >= num_frames()) throw ContractViolation("set_frame_chw: index out of range");
    if (chw.rank() != 3 || chw.dim(0) != 3 || chw.dim(1) != h || chw.dim(2) != w)
        throw ContractViolation("set_frame_chw: frame shape mismatch " + chw.shape_str());
    double* dst = frames.data() + t * h * w * 3;
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            double* px = dst + (y * w + x) * 3;
            for (int c = 0; c < 3; ++c) {
                double v = chw[(c * h + y) * w + x];
                px[c] = clamp ? std::clamp(v, 0.0, 1.0) : v;
            }
        }
}

}  // namespace nervkit
