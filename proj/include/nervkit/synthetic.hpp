// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nervkit/video.hpp"

namespace nervkit {

/// Deterministic smooth test footage: drifting color gradients plus a pair of
/// moving Gaussian blobs. Values lie strictly inside [0,1]; content is
/// non-degenerate (varies across frames and pixels).
VideoTensor make_synthetic_video(std::int64_t frames, std::int64_t height, std::int64_t width,
                                 std::uint64_t seed = 0, const std::string& name = "synthetic");

/// Consecutive 8-frame style clips cut from independent synthetic videos.
std::vector<VideoTensor> make_synthetic_clips(int count, int clip_frames, std::int64_t height, std::int64_t width,
                                              std::uint64_t seed = 0);

}  // namespace nervkit
