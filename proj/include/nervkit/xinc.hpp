// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Head-layer neuron dissection: per-kernel contribution maps, shuffle-aware
// rearrangement, magnitude ordering and motion-fluctuation analysis.

#pragma once

#include "nervkit/components.hpp"
#include "nervkit/hypernerv.hpp"

namespace nervkit {

/// One spatial contribution map per 2-D kernel of a convolutional layer.
/// Kernel k corresponds to (c_in, c_out) = (k % C_in, k / C_in); the
/// per-output-channel sum of maps plus the bias reconstructs the layer's
/// pre-activation output. Maps stay linear; activations are applied only in
/// summed views.
struct ContributionMaps {
    Tensor maps;  // (C_in * C_out, H, W), output-channel major
    std::vector<std::array<std::int64_t, 2>> kernel_index;  // (c_in, c_out) per map
    Tensor bias;  // (C_out)
    double timestep = 0.0;
    std::int64_t c_in = 0, c_out = 0;
    // PixelShuffle metadata when the layer feeds a shuffle.
    bool has_shuffle = false;
    std::array<int, 2> stride{1, 1};
};

/// Dissect any convolution given its input; pad is kernel/2 (same-size).
ContributionMaps conv_contributions(const Tensor& input_chw, const Tensor& weight, const Tensor& bias);

/// Dissect a model's head layer at normalized time t.
ContributionMaps head_contributions(const Model& model, double t);

/// Dissect a hypo-network's head (conv + PixelShuffle) for one clip frame;
/// shuffle metadata is filled in.
ContributionMaps hypo_head_contributions(const HyperNet& net, const std::vector<Tensor>& tokens, bool masked,
                                         int frame_idx);

/// Scatter each kernel's map onto its shuffle destination lattice; output is
/// (num_kernels, H*sh, W*sw) with zeros at non-owned positions.
Tensor shuffle_contributions(const ContributionMaps& maps, std::array<int, 2> stride);

/// Kernel order by descending total |contribution|; stable under ties.
std::vector<std::int64_t> sort_by_magnitude(const Tensor& maps);

/// Per-pixel |total_t+1 - total_t| of summed contributions.
Tensor motion_fluctuation(const ContributionMaps& at_t, const ContributionMaps& at_next);

/// Per-output-channel sum of maps + bias (the reconstruction the invariant
/// tests check); optionally passed through the model's final activation.
Tensor summed_view(const ContributionMaps& maps, std::optional<FinalActivation> activation = std::nullopt);

/// Total signed and absolute contribution per kernel (CSV columns).
struct KernelTotals {
    std::vector<double> sum;
    std::vector<double> abs_sum;
};
KernelTotals kernel_totals(const Tensor& maps);

}  // namespace nervkit
