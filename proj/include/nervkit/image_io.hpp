// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "nervkit/video.hpp"

namespace nervkit {

/// Load a directory of numbered 8-bit RGB images (png/jpg/bmp/ppm) in
/// lexicographic filename order; values scaled to [0,1]. No video-container
/// decoding.
VideoTensor ingest_frames(const std::string& directory, double frame_rate = 30.0);

/// Write frames as zero-padded numbered PNGs ("<prefix>00042.png").
std::vector<std::string> write_frames(const std::string& directory, const VideoTensor& video,
                                      const std::string& prefix = "frame_");

/// Single (3,H,W) frame in [0,1] to PNG.
void write_frame_png(const std::string& path, const Tensor& chw);

/// Render a scalar map to PNG. Diverging maps use a blue-white-red ramp
/// symmetric about zero; sequential maps a white-to-violet ramp from 0 to
/// max. Optional fixed scale overrides the per-map normalization.
void write_map_png(const std::string& path, const Tensor& map_hw, bool diverging, double scale = 0.0);

}  // namespace nervkit
