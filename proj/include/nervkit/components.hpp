// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// The disentangled NeRV design space: positional encodings, stems, upsample
// blocks, skip connections and the head layer, each independently
// constructible and differentiable.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nervkit/params.hpp"
#include "nervkit/transformer.hpp"

namespace nervkit {

enum class EncodingKind { sinusoidal_t, sinusoidal_xy_t, temporal_grid };
enum class StemKind { mlp, single_fc, transformer_xy, stemless };
enum class BlockKind { nerv_basic, ffnerv_double, bilinear_conv };
enum class SkipKind { none, t_skip, local_grid };
enum class FuseKind { add, affine_modulate };
enum class Activation { gelu, relu, sine };
enum class NormKind { none, layer_norm };
enum class FinalActivation { sigmoid, tanh_shift, add_half };

struct EncodingSpec {
    EncodingKind kind = EncodingKind::sinusoidal_t;
    double base = 1.25;   // sinusoidal frequency base
    int length = 80;      // frequency pairs; output dim is 2*length
    int grid_frames = 0;  // temporal_grid time extent
    std::array<std::int64_t, 3> grid_shape{0, 0, 0};  // (fc_h, fc_w, grid_dim)
};

struct StemSpec {
    StemKind kind = StemKind::single_fc;
    std::vector<std::int64_t> hidden_dims;            // mlp
    std::array<std::int64_t, 3> out_shape{0, 0, 0};   // (fc_h, fc_w, fc_dim)
    int xy_length = 16;                               // transformer_xy: xy frequency pairs
    std::int64_t dim = 64;                            // transformer_xy token width
    int heads = 4;
};

struct BlockSpec {
    BlockKind kind = BlockKind::nerv_basic;
    std::array<int, 2> stride{2, 2};  // (s_h, s_w)
    std::int64_t in_channels = 0;     // 0 = derive from exp/r plan
    std::int64_t out_channels = 0;
    int kernel_size = 3;
    Activation activation = Activation::gelu;
    NormKind norm = NormKind::none;
};

struct SkipSpec {
    SkipKind kind = SkipKind::none;
    FuseKind fuse = FuseKind::add;
    bool norm_before_fuse = false;
    // local_grid parameterization: per-block grid over time and the
    // (s_h x s_w) phase lattice.
    int grid_frames = 8;
    std::int64_t grid_dim = 8;
    // Sinusoidal t-encoding feeding the per-block skip FCs.
    double t_base = 1.25;
    int t_length = 40;
};

struct ModelConfig {
    std::string name = "model";
    EncodingSpec encoding;
    StemSpec stem;
    std::vector<BlockSpec> blocks;
    SkipSpec skip;
    int head_kernel = 3;
    FinalActivation final_activation = FinalActivation::sigmoid;
    double expansion = 4.0;  // first-block channel expansion (exp)
    double reduction = 2.0;  // per-block channel reduction (r)
    std::array<std::int64_t, 2> target_resolution{0, 0};

    std::int64_t fc_h() const { return stem.kind == StemKind::stemless ? encoding.grid_shape[0] : stem.out_shape[0]; }
    std::int64_t fc_w() const { return stem.kind == StemKind::stemless ? encoding.grid_shape[1] : stem.out_shape[1]; }
    std::int64_t fc_dim() const { return stem.kind == StemKind::stemless ? encoding.grid_shape[2] : stem.out_shape[2]; }

    /// Dimension of the stem input encoding (sinusoidal kinds only).
    std::int64_t encoding_dim() const;

    /// Throws ConfigError when any invariant is broken.
    void validate() const;

    /// Copy with block in/out channels filled from the exp/r plan where they
    /// were left at 0. validate() is called on the result.
    ModelConfig resolved() const;
};

/// Widths produced by the exp/r rule: first width round(fc_dim*exp), then
/// round(prev/r) per block, floored at 4. Rounding is half-away-from-zero.
std::vector<std::int64_t> channel_plan_widths(std::int64_t fc_dim, double expansion, double reduction,
                                              std::size_t num_blocks);

/// [sin(base^i * pi * t), cos(base^i * pi * t)] for i in [0, length).
/// Layout: all sines first, then all cosines.
Tensor sinusoidal_encode(double t, double base, int length);

/// An assembled, trainable video INR. Parameters live in a ParamStore; each
/// forward pass records a fresh graph on the caller's tape.
class Model {
public:
    explicit Model(ModelConfig config, std::uint64_t seed = 0);

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    BoundParams bind(ad::Tape& tape, bool trainable) const { return bind_params(tape, params_, trainable); }

    /// Frame prediction for normalized t in [0,1]; returns a (3,H,W) Var.
    ad::Var forward(ad::Tape& tape, const BoundParams& p, double t) const;

    /// Convenience inference path (no gradients), clamped to [0,1].
    Tensor render(double t) const;

    /// Pre-activation head output and its input, for dissection tooling.
    struct HeadTap {
        Tensor head_input;       // (c_in, H, W)
        Tensor pre_activation;   // (3, H, W)
    };
    HeadTap head_tap(double t) const;

private:
    ModelConfig config_;
    ParamStore params_;
    TransformerConfig stem_tf_;

    ad::Var encode_and_stem(ad::Tape& tape, const BoundParams& p, double t) const;
    ad::Var block_forward_idx(ad::Tape& tape, const BoundParams& p, std::size_t i, ad::Var x, double t) const;
};

/// Standalone block application used by tests: spec channels must be
/// explicit. skip_vec, when provided, is the per-channel fusion vector.
ad::Var apply_activation(ad::Tape& tape, ad::Var x, Activation act);
ad::Var apply_final_activation(ad::Tape& tape, ad::Var x, FinalActivation act);

}  // namespace nervkit
