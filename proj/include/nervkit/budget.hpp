// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter-distribution planning, closed-form parameter counting and FLOPs
// estimation for the exp/r/ks knobs.

#pragma once

#include "nervkit/components.hpp"

namespace nervkit {

struct ChannelPlan {
    std::vector<std::int64_t> per_layer_channels;    // block output widths
    std::vector<std::int64_t> conv_output_channels;  // pre-shuffle conv widths
    std::int64_t total_params = 0;
    std::int64_t total_flops_per_frame = 0;
};

ChannelPlan plan_channels(std::int64_t fc_dim, double expansion, double reduction,
                          const std::vector<BlockSpec>& blocks);

/// Closed-form learnable-parameter count for a config: conv/FC weights and
/// biases, skip FCs, per-block local grids, temporal grids and norm affine
/// parameters. Must agree exactly with walking an assembled model's tensors.
std::int64_t count_params(const ModelConfig& config);

/// Forward multiply-add cost (counted as 2 FLOPs) of conv/FC layers at their
/// true feature resolutions; activations, shuffles and interpolation are
/// excluded.
std::int64_t estimate_flops(const ModelConfig& config);
std::int64_t estimate_flops(const ModelConfig& config, std::array<std::int64_t, 2> resolution);

/// Scale fc_dim (and a tied grid dim) so count_params approaches
/// target_params. Deterministic: binary search over integer fc_dim in
/// [4, 4096], closest count wins, ties toward the smaller width.
ModelConfig solve_width(std::int64_t target_params, const ModelConfig& tmpl, double tolerance);

}  // namespace nervkit
