// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "nervkit/tensor.hpp"

namespace nervkit {

/// A frame sequence with values in [0,1], stored (T, H, W, 3) interleaved.
struct VideoTensor {
    Tensor frames;           // (T, H, W, 3)
    double frame_rate = 0.0; // metadata only
    std::string name;

    VideoTensor() = default;
    VideoTensor(Tensor f, double fps = 0.0, std::string n = "");

    std::int64_t num_frames() const { return frames.rank() == 4 ? frames.dim(0) : 0; }
    std::int64_t height() const { return frames.rank() == 4 ? frames.dim(1) : 0; }
    std::int64_t width() const { return frames.rank() == 4 ? frames.dim(2) : 0; }

    /// Frame t as a planar (3, H, W) tensor (model-side layout).
    Tensor frame_chw(std::int64_t t) const;
    /// Write a planar (3, H, W) frame back at index t, clamped to [0,1] if clamp.
    void set_frame_chw(std::int64_t t, const Tensor& chw, bool clamp = false);

    /// Validate invariants: rank 4, trailing dim 3, finite values in [0,1].
    void validate() const;
};

/// Quality summary for a reconstruction.
struct MetricReport {
    double psnr = 0.0;     // dB; +inf for exact reconstruction
    double ms_ssim = 0.0;  // in [0,1]; NaN when not computed
    std::vector<double> per_frame_psnr;
    std::vector<double> per_frame_ms_ssim;
};

}  // namespace nervkit
