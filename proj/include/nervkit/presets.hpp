// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nervkit/components.hpp"
#include "nervkit/hypernerv.hpp"

namespace nervkit {

/// Built-in model templates. Names: "nerv" (single-FC stem), "onerv" (MLP
/// stem), "enerv" (xy transformer stem + normalized t-skips), "ffnerv"
/// (temporal grid, stemless, double-conv blocks), "hinerv-style" (bilinear
/// blocks + local-grid skips), "rnerv-small", "rnerv-large".
/// grid_frames applies to grid-encoded templates (pass the video's T/4-ish).
ModelConfig preset_model_config(const std::string& name, std::array<std::int64_t, 2> resolution,
                                int grid_frames = 8);

std::vector<std::string> preset_model_names();

/// Frozen 1080p templates for the 1.5M/3M parameter presets: grid extents are
/// pinned so an integer-width solve lands within 1% of both targets ("nerv",
/// "ffnerv") or of the size the preset is defined at ("rnerv-small" -> 1.5M,
/// "rnerv-large" -> 3M).
ModelConfig paper_template(const std::string& name);

/// Hyper-network presets. Names: "base" (fc_dim 20 hypo), "fc16",
/// "mask-large", "mask-small", "desk" (tiny, for tests and demos).
HyperConfig preset_hyper_config(const std::string& name);

std::vector<std::string> preset_hyper_names();

}  // namespace nervkit
