// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/components.hpp"

#include <algorithm>
#include <cmath>

#include "nervkit/common.hpp"

namespace nervkit {

std::vector<std::int64_t> channel_plan_widths(std::int64_t fc_dim, double expansion, double reduction,
                                              std::size_t num_blocks) {
    if (fc_dim < 1) throw ConfigError("channel plan: fc_dim must be >= 1");
    if (expansion < 1.0) throw ConfigError("channel plan: expansion must be >= 1");
    if (reduction < 1.0) throw ConfigError("channel plan: reduction must be >= 1");
    std::vector<std::int64_t> widths;
    widths.reserve(num_blocks);
    double prev = 0.0;
    for (std::size_t i = 0; i < num_blocks; ++i) {
        double raw = (i == 0) ? static_cast<double>(fc_dim) * expansion : prev / reduction;
        std::int64_t w = std::max<std::int64_t>(4, std::llround(raw));
        widths.push_back(w);
        prev = static_cast<double>(w);
    }
    return widths;
}

Tensor sinusoidal_encode(double t, double base, int length) {
    if (base <= 1.0) throw ConfigError("sinusoidal encoding: base must be > 1");
    if (length < 1) throw ConfigError("sinusoidal encoding: length must be >= 1");
    Tensor out({2 * static_cast<std::int64_t>(length)});
    double freq = M_PI * t;
    for (int i = 0; i < length; ++i) {
        out[i] = std::sin(freq);
        out[length + i] = std::cos(freq);
        freq *= base;
    }
    return out;
}

std::int64_t ModelConfig::encoding_dim() const {
    switch (encoding.kind) {
        case EncodingKind::sinusoidal_t:
        case EncodingKind::sinusoidal_xy_t:
            return 2 * encoding.length;
        case EncodingKind::temporal_grid:
            return encoding.grid_shape[2];
    }
    return 0;
}

void ModelConfig::validate() const {
    if (target_resolution[0] < 1 || target_resolution[1] < 1)
        throw ConfigError("target_resolution must be positive");

    switch (encoding.kind) {
        case EncodingKind::sinusoidal_t:
        case EncodingKind::sinusoidal_xy_t:
            if (encoding.base <= 1.0) throw ConfigError("sinusoidal encoding: base must be > 1");
            if (encoding.length < 1) throw ConfigError("sinusoidal encoding: length must be >= 1");
            break;
        case EncodingKind::temporal_grid:
            if (encoding.grid_frames < 2) throw ConfigError("temporal grid encoding requires grid_frames >= 2");
            if (encoding.grid_shape[0] < 1 || encoding.grid_shape[1] < 1 || encoding.grid_shape[2] < 1)
                throw ConfigError("temporal grid encoding requires a positive grid_shape");
            break;
    }

    switch (stem.kind) {
        case StemKind::stemless:
            if (encoding.kind != EncodingKind::temporal_grid)
                throw ConfigError("stemless models require a temporal_grid encoding");
            if (stem.out_shape != std::array<std::int64_t, 3>{0, 0, 0} && stem.out_shape != encoding.grid_shape)
                throw ConfigError("stemless: stem out_shape must match the encoding grid_shape");
            break;
        case StemKind::single_fc:
            if (encoding.kind == EncodingKind::sinusoidal_xy_t)
                throw ConfigError("single_fc stem expects a sinusoidal_t or temporal_grid encoding");
            if (encoding.kind == EncodingKind::temporal_grid &&
                (encoding.grid_shape[0] != stem.out_shape[0] || encoding.grid_shape[1] != stem.out_shape[1]))
                throw ConfigError("single_fc over a grid encoding maps per position; grid fc_h/fc_w must match");
            break;
        case StemKind::mlp:
            if (encoding.kind != EncodingKind::sinusoidal_t)
                throw ConfigError("mlp stem expects a sinusoidal_t encoding");
            break;
        case StemKind::transformer_xy:
            if (encoding.kind != EncodingKind::sinusoidal_xy_t)
                throw ConfigError("transformer_xy stem expects a sinusoidal_xy_t encoding");
            if (stem.dim < stem.heads || stem.dim % stem.heads != 0)
                throw ConfigError("transformer_xy stem: dim must be a positive multiple of heads");
            break;
    }
    if (stem.kind != StemKind::stemless &&
        (stem.out_shape[0] < 1 || stem.out_shape[1] < 1 || stem.out_shape[2] < 1))
        throw ConfigError("stem out_shape must be positive (fc_h, fc_w, fc_dim)");

    std::int64_t ph = fc_h(), pw = fc_w();
    for (const BlockSpec& b : blocks) {
        if (b.stride[0] < 1 || b.stride[1] < 1) throw ConfigError("block stride must be >= 1");
        if (b.kernel_size < 1 || b.kernel_size % 2 == 0)
            throw ConfigError("block kernel_size must be odd and >= 1");
        if (b.in_channels < 0 || b.out_channels < 0) throw ConfigError("block channels must be >= 0");
        ph *= b.stride[0];
        pw *= b.stride[1];
    }
    if (ph != target_resolution[0] || pw != target_resolution[1])
        throw ConfigError("stride product times fc grid gives " + std::to_string(ph) + "x" + std::to_string(pw) +
                          " but target_resolution is " + std::to_string(target_resolution[0]) + "x" +
                          std::to_string(target_resolution[1]));

    if (head_kernel < 1 || head_kernel % 2 == 0) throw ConfigError("head_kernel must be odd and >= 1");

    bool any_derived = false;
    for (const BlockSpec& b : blocks) any_derived = any_derived || b.out_channels == 0;
    if (any_derived) {
        if (expansion < 1.0) throw ConfigError("exp must be >= 1");
        if (reduction < 1.0) throw ConfigError("r must be >= 1");
    }

    if (skip.kind == SkipKind::t_skip) {
        if (skip.t_base <= 1.0 || skip.t_length < 1) throw ConfigError("t_skip encoding: base > 1, length >= 1");
    }
    if (skip.kind == SkipKind::local_grid) {
        if (skip.grid_frames < 2) throw ConfigError("local_grid skip requires grid_frames >= 2");
        if (skip.grid_dim < 1) throw ConfigError("local_grid skip requires grid_dim >= 1");
    }
}

ModelConfig ModelConfig::resolved() const {
    validate();
    ModelConfig out = *this;
    std::vector<std::int64_t> plan = channel_plan_widths(fc_dim(), expansion, reduction, blocks.size());
    std::int64_t prev = fc_dim();
    for (std::size_t i = 0; i < out.blocks.size(); ++i) {
        BlockSpec& b = out.blocks[i];
        if (b.in_channels == 0) b.in_channels = prev;
        if (b.in_channels != prev)
            throw ConfigError("block " + std::to_string(i) + " in_channels " + std::to_string(b.in_channels) +
                              " does not match the previous width " + std::to_string(prev));
        if (b.out_channels == 0) b.out_channels = plan[i];
        if (b.out_channels < 1) throw ConfigError("block " + std::to_string(i) + " out_channels must be >= 1");
        prev = b.out_channels;
    }
    return out;
}

ad::Var apply_activation(ad::Tape& tape, ad::Var x, Activation act) {
    switch (act) {
        case Activation::gelu: return ad::gelu(tape, x);
        case Activation::relu: return ad::relu(tape, x);
        case Activation::sine: return ad::sine(tape, x);
    }
    return x;
}

ad::Var apply_final_activation(ad::Tape& tape, ad::Var x, FinalActivation act) {
    switch (act) {
        case FinalActivation::sigmoid:
            return ad::sigmoid(tape, x);
        case FinalActivation::tanh_shift:
            return ad::add_scalar(tape, ad::mul_scalar(tape, ad::tanh_op(tape, x), 0.5), 0.5);
        case FinalActivation::add_half:
            return ad::add_scalar(tape, x, 0.5);
    }
    return x;
}

namespace {

/// Time-interpolate a (frames, rows, cols) grid parameter: linear mix of the
/// two nearest frames, endpoints returned unchanged.
ad::Var grid_time_interp(ad::Tape& tape, ad::Var grid, std::int64_t frames, std::int64_t rows, std::int64_t cols,
                         double t) {
    if (t < 0.0 || t > 1.0) throw ContractViolation("grid interpolation: t must be within [0,1]");
    ad::Var flat = ad::reshape(tape, grid, {frames, rows * cols});
    double pos = t * static_cast<double>(frames - 1);
    std::int64_t k = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(pos)), frames - 2);
    k = std::max<std::int64_t>(k, 0);
    double a = pos - static_cast<double>(k);
    ad::Var fk = ad::slice_rows(tape, flat, k, k + 1);
    if (a == 0.0) return ad::reshape(tape, fk, {rows, cols});
    ad::Var fk1 = ad::slice_rows(tape, flat, k + 1, k + 2);
    if (a == 1.0) return ad::reshape(tape, fk1, {rows, cols});
    return ad::reshape(tape, ad::scale_add(tape, fk, fk1, 1.0 - a, a), {rows, cols});
}

Tensor xy_token_encoding(std::int64_t fc_h, std::int64_t fc_w, double base, int length) {
    // Per grid position: [enc(u) ; enc(v)] with u, v normalized like t.
    Tensor out({fc_h * fc_w, 4 * static_cast<std::int64_t>(length)});
    for (std::int64_t y = 0; y < fc_h; ++y) {
        double v = fc_h > 1 ? static_cast<double>(y) / static_cast<double>(fc_h - 1) : 0.0;
        for (std::int64_t x = 0; x < fc_w; ++x) {
            double u = fc_w > 1 ? static_cast<double>(x) / static_cast<double>(fc_w - 1) : 0.0;
            Tensor eu = sinusoidal_encode(u, base, length);
            Tensor ev = sinusoidal_encode(v, base, length);
            double* row = out.data() + (y * fc_w + x) * 4 * length;
            std::copy(eu.data(), eu.data() + 2 * length, row);
            std::copy(ev.data(), ev.data() + 2 * length, row + 2 * length);
        }
    }
    return out;
}

}  // namespace

Model::Model(ModelConfig config, std::uint64_t seed) : config_(config.resolved()) {
    Rng rng(seed);
    const ModelConfig& c = config_;
    const std::int64_t h = c.fc_h(), w = c.fc_w(), d = c.fc_dim();

    if (c.encoding.kind == EncodingKind::temporal_grid) {
        params_.add("encoding.grid", {c.encoding.grid_frames, c.encoding.grid_shape[2], h, w})
            .fill_normal(rng, 0.0, 1e-2);
    }

    switch (c.stem.kind) {
        case StemKind::stemless:
            break;
        case StemKind::single_fc:
            if (c.encoding.kind == EncodingKind::temporal_grid) {
                // Per-position map realized as a 1x1 convolution.
                params_.add_conv("stem.fc", d, c.encoding.grid_shape[2], 1, 1, rng);
            } else {
                params_.add_linear("stem.fc", h * w * d, c.encoding_dim(), rng);
            }
            break;
        case StemKind::mlp: {
            std::int64_t in = c.encoding_dim();
            for (std::size_t i = 0; i < c.stem.hidden_dims.size(); ++i) {
                params_.add_linear("stem.mlp" + std::to_string(i), c.stem.hidden_dims[i], in, rng);
                in = c.stem.hidden_dims[i];
            }
            params_.add_linear("stem.mlp" + std::to_string(c.stem.hidden_dims.size()), h * w * d, in, rng);
            break;
        }
        case StemKind::transformer_xy: {
            params_.add_linear("stem.tproj", c.stem.dim, 2 * c.encoding.length, rng);
            params_.add_linear("stem.xyproj", c.stem.dim, 4 * c.stem.xy_length, rng);
            stem_tf_ = TransformerConfig{c.stem.dim, 2 * c.stem.dim, c.stem.heads, 1};
            add_transformer_params(params_, "stem.tf", stem_tf_, rng);
            params_.add_linear("stem.out", d, c.stem.dim, rng);
            break;
        }
    }

    for (std::size_t i = 0; i < c.blocks.size(); ++i) {
        const BlockSpec& b = c.blocks[i];
        std::string p = "block" + std::to_string(i);
        if (b.kind == BlockKind::ffnerv_double)
            params_.add_conv(p + ".dw", b.in_channels, 1, b.kernel_size, b.kernel_size, rng);
        if (b.kind == BlockKind::bilinear_conv) {
            params_.add_conv(p + ".conv", b.out_channels, b.in_channels, b.kernel_size, b.kernel_size, rng);
        } else {
            params_.add_conv(p + ".conv", b.out_channels * b.stride[0] * b.stride[1], b.in_channels,
                             b.kernel_size, b.kernel_size, rng);
        }
        if (b.norm == NormKind::layer_norm) params_.add_norm(p + ".norm", b.out_channels);
        if (c.skip.kind == SkipKind::t_skip) {
            params_.add_linear(p + ".tskip", b.out_channels, 2 * c.skip.t_length, rng);
            if (c.skip.norm_before_fuse) params_.add_norm(p + ".fusenorm", b.out_channels);
        } else if (c.skip.kind == SkipKind::local_grid) {
            params_
                .add(p + ".lgrid",
                     {c.skip.grid_frames, static_cast<std::int64_t>(b.stride[0]) * b.stride[1], c.skip.grid_dim})
                .fill_normal(rng, 0.0, 1e-2);
            params_.add_linear(p + ".lgridfc", b.out_channels, c.skip.grid_dim, rng);
        }
    }

    std::int64_t head_in = c.blocks.empty() ? d : c.blocks.back().out_channels;
    params_.add_conv("head", 3, head_in, c.head_kernel, c.head_kernel, rng);
}

ad::Var Model::encode_and_stem(ad::Tape& tape, const BoundParams& p, double t) const {
    const ModelConfig& c = config_;
    const std::int64_t h = c.fc_h(), w = c.fc_w(), d = c.fc_dim();

    if (c.encoding.kind == EncodingKind::temporal_grid) {
        std::int64_t gd = c.encoding.grid_shape[2];
        ad::Var grid2d = grid_time_interp(tape, p["encoding.grid"], c.encoding.grid_frames, gd, h * w, t);
        ad::Var map = ad::reshape(tape, grid2d, {gd, h, w});
        if (c.stem.kind == StemKind::stemless) return map;
        return ad::conv2d(tape, map, p["stem.fc.weight"], p["stem.fc.bias"], 1, 0, 0);
    }

    Tensor enc_t = sinusoidal_encode(t, c.encoding.base, c.encoding.length);
    ad::Var enc = tape.constant(enc_t.reshaped({1, enc_t.numel()}));

    switch (c.stem.kind) {
        case StemKind::single_fc: {
            ad::Var y = ad::linear(tape, enc, p["stem.fc.weight"], p["stem.fc.bias"]);
            return ad::reshape(tape, y, {d, h, w});
        }
        case StemKind::mlp: {
            ad::Var y = enc;
            std::size_t layers = c.stem.hidden_dims.size() + 1;
            for (std::size_t i = 0; i < layers; ++i) {
                std::string prefix = "stem.mlp" + std::to_string(i);
                y = ad::linear(tape, y, p[prefix + ".weight"], p[prefix + ".bias"]);
                if (i + 1 < layers) y = ad::gelu(tape, y);
            }
            return ad::reshape(tape, y, {d, h, w});
        }
        case StemKind::transformer_xy: {
            ad::Var tf_t = ad::linear(tape, enc, p["stem.tproj.weight"], p["stem.tproj.bias"]);
            ad::Var t_tiled =
                ad::reshape(tape, ad::tile_rows_to(tape, tf_t, h * w * c.stem.dim), {h * w, c.stem.dim});
            ad::Var xy = tape.constant(xy_token_encoding(h, w, c.encoding.base, c.stem.xy_length));
            ad::Var tokens = ad::linear(tape, xy, p["stem.xyproj.weight"], p["stem.xyproj.bias"]);
            tokens = ad::mul(tape, tokens, t_tiled);
            tokens = transformer_forward(tape, stem_tf_, p, "stem.tf", tokens);
            ad::Var out = ad::linear(tape, tokens, p["stem.out.weight"], p["stem.out.bias"]);  // (h*w, d)
            return ad::reshape(tape, ad::transpose2d(tape, out), {d, h, w});
        }
        case StemKind::stemless:
            break;  // unreachable; validated earlier
    }
    throw ConfigError("unsupported encoding/stem combination");
}

ad::Var Model::block_forward_idx(ad::Tape& tape, const BoundParams& p, std::size_t i, ad::Var x, double t) const {
    const ModelConfig& c = config_;
    const BlockSpec& b = c.blocks[i];
    std::string pre = "block" + std::to_string(i);
    int pad = b.kernel_size / 2;

    ad::Var y = x;
    if (b.kind == BlockKind::ffnerv_double)
        y = ad::conv2d(tape, y, p[pre + ".dw.weight"], p[pre + ".dw.bias"], static_cast<int>(b.in_channels), pad,
                       pad);

    if (b.kind == BlockKind::bilinear_conv) {
        y = ad::bilinear_upsample(tape, y, b.stride[0], b.stride[1]);
        y = ad::conv2d(tape, y, p[pre + ".conv.weight"], p[pre + ".conv.bias"], 1, pad, pad);
    } else {
        y = ad::conv2d(tape, y, p[pre + ".conv.weight"], p[pre + ".conv.bias"], 1, pad, pad);
        y = ad::pixel_shuffle(tape, y, b.stride[0], b.stride[1]);
    }

    if (b.norm == NormKind::layer_norm)
        y = ad::layer_norm_channels(tape, y, p[pre + ".norm.gamma"], p[pre + ".norm.beta"]);
    y = apply_activation(tape, y, b.activation);

    if (c.skip.kind == SkipKind::t_skip) {
        Tensor enc = sinusoidal_encode(t, c.skip.t_base, c.skip.t_length);
        ad::Var ev = tape.constant(enc.reshaped({1, enc.numel()}));
        ad::Var v = ad::linear(tape, ev, p[pre + ".tskip.weight"], p[pre + ".tskip.bias"]);
        v = ad::reshape(tape, v, {b.out_channels});
        ad::Var z = y;
        if (c.skip.norm_before_fuse)
            z = ad::layer_norm_channels(tape, y, p[pre + ".fusenorm.gamma"], p[pre + ".fusenorm.beta"]);
        if (c.skip.fuse == FuseKind::add) {
            y = ad::add_channel(tape, z, v);
        } else {
            y = ad::mul_channel(tape, z, ad::add_scalar(tape, v, 1.0));
        }
    } else if (c.skip.kind == SkipKind::local_grid) {
        std::int64_t phases = static_cast<std::int64_t>(b.stride[0]) * b.stride[1];
        ad::Var g = grid_time_interp(tape, p[pre + ".lgrid"], c.skip.grid_frames, phases, c.skip.grid_dim, t);
        ad::Var proj = ad::linear(tape, g, p[pre + ".lgridfc.weight"], p[pre + ".lgridfc.bias"]);
        y = ad::add_phase_broadcast(tape, y, proj, b.stride[0], b.stride[1]);
    }
    return y;
}

ad::Var Model::forward(ad::Tape& tape, const BoundParams& p, double t) const {
    if (t < 0.0 || t > 1.0) throw ContractViolation("model forward: t must be within [0,1]");
    ad::Var x = encode_and_stem(tape, p, t);
    for (std::size_t i = 0; i < config_.blocks.size(); ++i) x = block_forward_idx(tape, p, i, x, t);
    int pad = config_.head_kernel / 2;
    x = ad::conv2d(tape, x, p["head.weight"], p["head.bias"], 1, pad, pad);
    return apply_final_activation(tape, x, config_.final_activation);
}

Tensor Model::render(double t) const {
    ad::Tape tape;
    BoundParams p = bind(tape, false);
    ad::Var y = forward(tape, p, t);
    return tape.val(y);
}

Model::HeadTap Model::head_tap(double t) const {
    ad::Tape tape;
    BoundParams p = bind(tape, false);
    ad::Var x = encode_and_stem(tape, p, t);
    for (std::size_t i = 0; i < config_.blocks.size(); ++i) x = block_forward_idx(tape, p, i, x, t);
    int pad = config_.head_kernel / 2;
    ad::Var pre = ad::conv2d(tape, x, p["head.weight"], p["head.bias"], 1, pad, pad);
    return HeadTap{tape.val(x), tape.val(pre)};
}

}  // namespace nervkit
