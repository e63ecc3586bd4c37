// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/budget.hpp"

#include <cmath>

#include "nervkit/common.hpp"

namespace nervkit {

namespace {

std::int64_t conv_params(std::int64_t cout, std::int64_t cin_per_group, int k) {
    return cout * cin_per_group * k * k + cout;
}

std::int64_t linear_params(std::int64_t out, std::int64_t in) { return out * in + out; }

std::int64_t transformer_params(const TransformerConfig& tf) {
    std::int64_t per_block = 2 * tf.dim                        // ln1
                             + 4 * linear_params(tf.dim, tf.dim)  // q,k,v,o
                             + 2 * tf.dim                       // ln2
                             + linear_params(tf.ff_dim, tf.dim) + linear_params(tf.dim, tf.ff_dim);
    return per_block * tf.blocks + 2 * tf.dim;  // + ln_out
}

}  // namespace

ChannelPlan plan_channels(std::int64_t fc_dim, double expansion, double reduction,
                          const std::vector<BlockSpec>& blocks) {
    ChannelPlan plan;
    plan.per_layer_channels = channel_plan_widths(fc_dim, expansion, reduction, blocks.size());
    plan.conv_output_channels.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        std::int64_t c = plan.per_layer_channels[i];
        if (blocks[i].kind == BlockKind::bilinear_conv)
            plan.conv_output_channels.push_back(c);
        else
            plan.conv_output_channels.push_back(c * blocks[i].stride[0] * blocks[i].stride[1]);
    }
    // Params/FLOPs for the block stack alone (stem/head accounted in the
    // full-config functions below).
    std::int64_t prev = fc_dim;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        int k = blocks[i].kernel_size;
        if (blocks[i].kind == BlockKind::ffnerv_double) plan.total_params += conv_params(prev, 1, k);
        plan.total_params += conv_params(plan.conv_output_channels[i], prev, k);
        prev = plan.per_layer_channels[i];
    }
    return plan;
}

std::int64_t count_params(const ModelConfig& config) {
    ModelConfig c = config.resolved();
    std::int64_t total = 0;
    const std::int64_t h = c.fc_h(), w = c.fc_w(), d = c.fc_dim();

    if (c.encoding.kind == EncodingKind::temporal_grid)
        total += static_cast<std::int64_t>(c.encoding.grid_frames) * c.encoding.grid_shape[2] * h * w;

    switch (c.stem.kind) {
        case StemKind::stemless:
            break;
        case StemKind::single_fc:
            if (c.encoding.kind == EncodingKind::temporal_grid)
                total += conv_params(d, c.encoding.grid_shape[2], 1);
            else
                total += linear_params(h * w * d, c.encoding_dim());
            break;
        case StemKind::mlp: {
            std::int64_t in = c.encoding_dim();
            for (std::int64_t hd : c.stem.hidden_dims) {
                total += linear_params(hd, in);
                in = hd;
            }
            total += linear_params(h * w * d, in);
            break;
        }
        case StemKind::transformer_xy: {
            total += linear_params(c.stem.dim, 2 * c.encoding.length);
            total += linear_params(c.stem.dim, 4 * c.stem.xy_length);
            total += transformer_params(TransformerConfig{c.stem.dim, 2 * c.stem.dim, c.stem.heads, 1});
            total += linear_params(d, c.stem.dim);
            break;
        }
    }

    for (const BlockSpec& b : c.blocks) {
        int k = b.kernel_size;
        if (b.kind == BlockKind::ffnerv_double) total += conv_params(b.in_channels, 1, k);
        if (b.kind == BlockKind::bilinear_conv)
            total += conv_params(b.out_channels, b.in_channels, k);
        else
            total += conv_params(b.out_channels * b.stride[0] * b.stride[1], b.in_channels, k);
        if (b.norm == NormKind::layer_norm) total += 2 * b.out_channels;
        if (c.skip.kind == SkipKind::t_skip) {
            total += linear_params(b.out_channels, 2 * c.skip.t_length);
            if (c.skip.norm_before_fuse) total += 2 * b.out_channels;
        } else if (c.skip.kind == SkipKind::local_grid) {
            total += static_cast<std::int64_t>(c.skip.grid_frames) * b.stride[0] * b.stride[1] * c.skip.grid_dim;
            total += linear_params(b.out_channels, c.skip.grid_dim);
        }
    }

    std::int64_t head_in = c.blocks.empty() ? d : c.blocks.back().out_channels;
    total += conv_params(3, head_in, c.head_kernel);
    return total;
}

std::int64_t estimate_flops(const ModelConfig& config) { return estimate_flops(config, config.target_resolution); }

std::int64_t estimate_flops(const ModelConfig& config, std::array<std::int64_t, 2> resolution) {
    ModelConfig c = config.resolved();
    std::int64_t sh_total = 1, sw_total = 1;
    for (const BlockSpec& b : c.blocks) {
        sh_total *= b.stride[0];
        sw_total *= b.stride[1];
    }
    if (resolution[0] % sh_total != 0 || resolution[1] % sw_total != 0)
        throw ConfigError("estimate_flops: resolution not divisible by the stride product");
    std::int64_t h = resolution[0] / sh_total, w = resolution[1] / sw_total;
    const std::int64_t d = c.fc_dim();

    auto fc_flops = [](std::int64_t out, std::int64_t in) { return 2 * out * in; };

    std::int64_t total = 0;
    switch (c.stem.kind) {
        case StemKind::stemless:
            break;
        case StemKind::single_fc:
            if (c.encoding.kind == EncodingKind::temporal_grid)
                total += 2 * h * w * c.encoding.grid_shape[2] * d;
            else
                total += fc_flops(h * w * d, c.encoding_dim());
            break;
        case StemKind::mlp: {
            std::int64_t in = c.encoding_dim();
            for (std::int64_t hd : c.stem.hidden_dims) {
                total += fc_flops(hd, in);
                in = hd;
            }
            total += fc_flops(h * w * d, in);
            break;
        }
        case StemKind::transformer_xy: {
            std::int64_t n = h * w, dim = c.stem.dim, ff = 2 * dim;
            total += fc_flops(dim, 2 * c.encoding.length);
            total += n * fc_flops(dim, 4 * c.stem.xy_length);
            total += n * 4 * fc_flops(dim, dim);      // q,k,v,o
            total += 2 * (2 * n * n * dim);           // scores and weighted values
            total += n * (fc_flops(ff, dim) + fc_flops(dim, ff));
            total += n * fc_flops(d, dim);
            break;
        }
    }

    std::int64_t prev = d;
    for (const BlockSpec& b : c.blocks) {
        std::int64_t k2 = static_cast<std::int64_t>(b.kernel_size) * b.kernel_size;
        if (b.kind == BlockKind::ffnerv_double) total += 2 * h * w * k2 * prev;
        if (b.kind == BlockKind::bilinear_conv) {
            total += 2 * (h * b.stride[0]) * (w * b.stride[1]) * k2 * prev * b.out_channels;
        } else {
            total += 2 * h * w * k2 * prev * (b.out_channels * b.stride[0] * b.stride[1]);
        }
        if (c.skip.kind == SkipKind::t_skip) total += fc_flops(b.out_channels, 2 * c.skip.t_length);
        if (c.skip.kind == SkipKind::local_grid)
            total += static_cast<std::int64_t>(b.stride[0]) * b.stride[1] * fc_flops(b.out_channels, c.skip.grid_dim);
        h *= b.stride[0];
        w *= b.stride[1];
        prev = b.out_channels;
    }

    total += 2 * h * w * static_cast<std::int64_t>(c.head_kernel) * c.head_kernel * prev * 3;
    return total;
}

namespace {

ModelConfig with_fc_dim(const ModelConfig& tmpl, std::int64_t d) {
    ModelConfig c = tmpl;
    if (c.stem.kind == StemKind::stemless) {
        c.encoding.grid_shape[2] = d;
    } else {
        if (c.encoding.kind == EncodingKind::temporal_grid) {
            // Keep the grid feature dim proportional to fc_dim.
            double ratio = static_cast<double>(tmpl.encoding.grid_shape[2]) /
                           static_cast<double>(tmpl.stem.out_shape[2]);
            c.encoding.grid_shape[2] = std::max<std::int64_t>(1, std::llround(ratio * static_cast<double>(d)));
        }
        c.stem.out_shape[2] = d;
    }
    return c;
}

}  // namespace

ModelConfig solve_width(std::int64_t target_params, const ModelConfig& tmpl, double tolerance) {
    if (target_params < 1) throw ConfigError("solve_width: target must be positive");
    for (const BlockSpec& b : tmpl.blocks)
        if (b.out_channels != 0)
            throw ConfigError("solve_width: template blocks must use derived channels (out_channels == 0)");

    constexpr std::int64_t kLo = 4, kHi = 4096;
    auto count_at = [&](std::int64_t d) { return count_params(with_fc_dim(tmpl, d)); };

    // count_params is nondecreasing in fc_dim; find the first width at or
    // above target.
    std::int64_t lo = kLo, hi = kHi;
    if (count_at(kLo) >= target_params) {
        hi = kLo;
    } else if (count_at(kHi) < target_params) {
        lo = kHi;
    } else {
        while (lo + 1 < hi) {
            std::int64_t mid = lo + (hi - lo) / 2;
            if (count_at(mid) >= target_params)
                hi = mid;
            else
                lo = mid;
        }
    }

    std::int64_t best = hi;
    std::int64_t best_err = std::llabs(count_at(hi) - target_params);
    if (hi > kLo) {
        std::int64_t below_err = std::llabs(count_at(hi - 1) - target_params);
        if (below_err <= best_err) {  // ties toward the smaller width
            best = hi - 1;
            best_err = below_err;
        }
    }

    ModelConfig result = with_fc_dim(tmpl, best);
    std::int64_t got = count_params(result);
    if (static_cast<double>(std::llabs(got - target_params)) >
        tolerance * static_cast<double>(target_params))
        throw ConfigError("solve_width: cannot reach " + std::to_string(target_params) + " within " +
                          std::to_string(tolerance * 100.0) + "%; nearest achievable count is " +
                          std::to_string(got) + " at fc_dim " + std::to_string(best));
    return result;
}

}  // namespace nervkit
