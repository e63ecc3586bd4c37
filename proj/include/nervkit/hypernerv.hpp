// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-forward-pass clip encoding: a transformer hyper-network predicts
// weight tokens that modulate shared hypo-network parameters, with weight
// token masking for two selectable bitrates per clip.

#pragma once

#include <functional>

#include "nervkit/codec.hpp"
#include "nervkit/components.hpp"
#include "nervkit/transformer.hpp"
#include "nervkit/video.hpp"

namespace nervkit {

struct HypoLayerSpec {
    int kernel_size = 3;
    std::array<int, 2> upscale{4, 4};
    std::int64_t token_count_max = 0;  // 0 = unmodulated (shared params only)
    std::int64_t token_count_min = 0;  // stored size when masked
    std::int64_t token_dim = 0;
};

struct HypoLayout {
    std::vector<HypoLayerSpec> layers;  // last layer is the 3-channel head
    std::int64_t fc_dim = 16;           // hidden width after each shuffle
    std::int64_t pos_dim = 16;          // learnable position embedding channels
    Activation activation = Activation::gelu;
    std::array<std::int64_t, 2> clip_resolution{256, 256};
    int clip_frames = 8;

    std::int64_t in_channels(std::size_t i) const { return i == 0 ? pos_dim : fc_dim; }
    std::int64_t out_channels(std::size_t i) const { return i + 1 == layers.size() ? 3 : fc_dim; }
    /// Pre-shuffle conv output channels of layer i.
    std::int64_t conv_channels(std::size_t i) const {
        return out_channels(i) * layers[i].upscale[0] * layers[i].upscale[1];
    }
    /// Conv weight element count (biases are shared-only and never modulated).
    std::int64_t layer_weight_count(std::size_t i) const {
        const HypoLayerSpec& l = layers[i];
        return conv_channels(i) * in_channels(i) * l.kernel_size * l.kernel_size;
    }
    std::array<std::int64_t, 2> base_resolution() const;

    /// Unique (per-clip stored) parameter count: sum of token_count*token_dim.
    std::int64_t unique_params(bool masked) const;

    void validate() const;
};

struct HyperConfig {
    std::string name = "hypernerv";
    HypoLayout hypo;
    int patch_size = 64;
    TransformerConfig backbone{720, 2880, 12, 6};
    bool masking = false;      // train with weight token masking
    double masking_ratio = 0.5;  // fraction of samples masked per step

    std::int64_t video_tokens_per_clip() const;
    void validate() const;
};

/// Zero out the dropped (latter) tokens of each layer. Decode paths with
/// mask_on read only the kept tokens, so this is a no-op for them.
std::vector<Tensor> apply_mask(const std::vector<Tensor>& tokens, const HypoLayout& layout, bool mask_on);

/// Per-clip compressed token payload ("NRVH" container).
struct ClipBitstream {
    std::string layout_hash;
    bool masked = false;
    int bits = 8;
    struct LayerTokens {
        std::int64_t count = 0;
        std::int64_t dim = 0;
        double scale = 0.0;
        FrequencyTable table;
        std::uint64_t symbol_count = 0;
        std::vector<std::uint8_t> payload;
    };
    std::vector<LayerTokens> layers;  // modulated layers only, in layer order

    std::vector<std::uint8_t> serialize() const;
    static ClipBitstream deserialize(const std::vector<std::uint8_t>& bytes);
    std::size_t byte_size() const { return serialize().size(); }
};

class HyperNet {
public:
    explicit HyperNet(HyperConfig config, std::uint64_t seed = 0);

    const HyperConfig& config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    BoundParams bind(ad::Tape& tape, bool trainable) const { return bind_params(tape, params_, trainable); }

    /// Non-overlapping patchification: (frames * (H/p) * (W/p), p*p*3) rows in
    /// frame-major, row-major patch order.
    Tensor tokenize_clip(const VideoTensor& clip) const;

    /// Weight-token prediction for one clip; one (token_count_max, token_dim)
    /// Var per modulated layer, in layer order.
    std::vector<ad::Var> predict_tokens(ad::Tape& tape, const BoundParams& p, const Tensor& video_tokens) const;

    /// Modulated hypo forward for one frame of the clip. tokens holds one Var
    /// per modulated layer (count rows may be max or min when masked).
    ad::Var hypo_forward(ad::Tape& tape, const BoundParams& p, const std::vector<ad::Var>& tokens, bool masked,
                         int frame_idx) const;

    /// Inference helpers on plain tensors.
    std::vector<Tensor> predict_tokens_value(const VideoTensor& clip) const;
    VideoTensor reconstruct(const std::vector<Tensor>& tokens, bool masked, const std::string& name = "clip") const;

    /// Head-layer inputs and the modulated head weights for one frame, for
    /// dissection tooling.
    struct HeadTap {
        Tensor input;   // (C_in, h, w) pre-head features
        Tensor weight;  // modulated (C_out*sh*sw, C_in, k, k)
        Tensor bias;
        std::array<int, 2> upscale;
    };
    HeadTap head_tap(const std::vector<Tensor>& tokens, bool masked, int frame_idx) const;

    /// Indices (into hypo layers) of modulated layers.
    const std::vector<std::size_t>& modulated_layers() const { return modulated_; }

private:
    HyperConfig config_;
    ParamStore params_;
    std::vector<std::size_t> modulated_;

    ad::Var layer_weight(ad::Tape& tape, const BoundParams& p, std::size_t layer, ad::Var tok, bool masked) const;
};

struct HyperTrainOptions {
    std::int64_t steps = 1000;
    int batch_clips = 4;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    std::function<void(std::int64_t step, double loss)> on_step;
};

struct HyperTrainResult {
    std::vector<double> loss_history;
    double final_loss = 0.0;
};

/// Optimize backbone + shared params + token slots + FCs with Adam at a fixed
/// learning rate. With masking enabled each sample is masked independently
/// with probability config.masking_ratio.
HyperTrainResult hyper_train(HyperNet& net, const std::vector<VideoTensor>& clips, const HyperTrainOptions& opts);

ClipBitstream encode_clip(const HyperNet& net, const VideoTensor& clip, bool mask_on, int bits,
                          const std::string& layout_hash);
/// Rebuild frames from stored tokens; bit-exact with hypo_forward on the same
/// dequantized tokens.
VideoTensor decode_clip(const HyperNet& net, const ClipBitstream& stream, const std::string& layout_hash);

/// Dequantized per-layer token tensors from a bitstream (kept tokens only).
std::vector<Tensor> decode_tokens(const ClipBitstream& stream);

}  // namespace nervkit
