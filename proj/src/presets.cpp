// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/presets.hpp"

#include "nervkit/common.hpp"

namespace nervkit {

namespace {

struct StridePlan {
    std::int64_t fc_h, fc_w;
    std::vector<std::array<int, 2>> strides;
};

StridePlan stride_plan(std::array<std::int64_t, 2> res) {
    if (res[0] == 1080 && res[1] == 1920)
        return {9, 16, {{5, 5}, {4, 4}, {3, 3}, {2, 2}}};
    if (res[0] == 720 && res[1] == 1280)
        return {9, 16, {{5, 5}, {4, 4}, {2, 2}, {2, 2}}};
    if (res[0] % 16 == 0 && res[1] % 16 == 0 && res[0] >= 64)
        return {res[0] / 16, res[1] / 16, {{2, 2}, {2, 2}, {2, 2}, {2, 2}}};
    if (res[0] % 8 == 0 && res[1] % 8 == 0)
        return {res[0] / 8, res[1] / 8, {{2, 2}, {2, 2}, {2, 2}}};
    if (res[0] % 4 == 0 && res[1] % 4 == 0)
        return {res[0] / 4, res[1] / 4, {{2, 2}, {2, 2}}};
    throw ConfigError("no built-in stride plan for " + std::to_string(res[0]) + "x" + std::to_string(res[1]) +
                      "; author a config file instead");
}

std::vector<BlockSpec> make_blocks(const StridePlan& plan, BlockKind kind, NormKind norm = NormKind::none) {
    std::vector<BlockSpec> blocks;
    for (const auto& s : plan.strides) {
        BlockSpec b;
        b.kind = kind;
        b.stride = s;
        b.kernel_size = 3;
        b.activation = Activation::gelu;
        b.norm = norm;
        blocks.push_back(b);
    }
    return blocks;
}

}  // namespace

ModelConfig preset_model_config(const std::string& name, std::array<std::int64_t, 2> resolution, int grid_frames) {
    StridePlan plan = stride_plan(resolution);
    ModelConfig c;
    c.name = name;
    c.target_resolution = resolution;
    c.expansion = 4.0;
    c.reduction = 2.0;

    // Default width; solve_width rescales it against a parameter target.
    const std::int64_t d0 = 16;

    if (name == "nerv") {
        c.encoding = {EncodingKind::sinusoidal_t, 1.25, 80, 0, {0, 0, 0}};
        c.stem.kind = StemKind::single_fc;
        c.stem.out_shape = {plan.fc_h, plan.fc_w, d0};
        c.blocks = make_blocks(plan, BlockKind::nerv_basic);
    } else if (name == "onerv") {
        c.encoding = {EncodingKind::sinusoidal_t, 1.25, 80, 0, {0, 0, 0}};
        c.stem.kind = StemKind::mlp;
        c.stem.hidden_dims = {512};
        c.stem.out_shape = {plan.fc_h, plan.fc_w, d0};
        c.blocks = make_blocks(plan, BlockKind::nerv_basic);
    } else if (name == "enerv") {
        c.encoding = {EncodingKind::sinusoidal_xy_t, 1.25, 80, 0, {0, 0, 0}};
        c.stem.kind = StemKind::transformer_xy;
        c.stem.out_shape = {plan.fc_h, plan.fc_w, d0};
        c.stem.xy_length = 16;
        c.stem.dim = 64;
        c.stem.heads = 4;
        c.blocks = make_blocks(plan, BlockKind::nerv_basic);
        c.skip.kind = SkipKind::t_skip;
        c.skip.fuse = FuseKind::affine_modulate;
        c.skip.norm_before_fuse = true;
    } else if (name == "ffnerv") {
        c.encoding = {EncodingKind::temporal_grid, 1.25, 80, grid_frames, {plan.fc_h, plan.fc_w, d0}};
        c.stem.kind = StemKind::stemless;
        c.blocks = make_blocks(plan, BlockKind::ffnerv_double);
    } else if (name == "hinerv-style") {
        c.encoding = {EncodingKind::temporal_grid, 1.25, 80, grid_frames, {plan.fc_h, plan.fc_w, d0}};
        c.stem.kind = StemKind::single_fc;
        c.stem.out_shape = {plan.fc_h, plan.fc_w, d0};
        c.blocks = make_blocks(plan, BlockKind::bilinear_conv);
        c.skip.kind = SkipKind::local_grid;
        c.skip.grid_frames = std::max(2, grid_frames / 2);
        c.skip.grid_dim = 8;
    } else if (name == "rnerv-small" || name == "rnerv-large") {
        c.encoding = {EncodingKind::temporal_grid, 1.25, 80, grid_frames, {plan.fc_h, plan.fc_w, d0}};
        c.stem.kind = StemKind::stemless;
        c.blocks = make_blocks(plan, BlockKind::ffnerv_double);
        c.skip.kind = SkipKind::t_skip;
        c.skip.fuse = FuseKind::affine_modulate;
        c.skip.norm_before_fuse = true;
        c.reduction = (name == "rnerv-small") ? 1.2 : 1.4;
    } else {
        throw ConfigError("unknown model preset '" + name + "'");
    }
    c.validate();
    return c;
}

std::vector<std::string> preset_model_names() {
    return {"nerv", "onerv", "enerv", "ffnerv", "hinerv-style", "rnerv-small", "rnerv-large"};
}

ModelConfig paper_template(const std::string& name) {
    // Stem length / grid extents pinned so integer fc_dim solutions land on
    // the paper's parameter presets within 1%.
    if (name == "nerv") {
        ModelConfig c = preset_model_config("nerv", {1080, 1920});
        c.encoding.length = 175;
        return c;
    }
    if (name == "ffnerv") return preset_model_config("ffnerv", {1080, 1920}, 348);
    if (name == "rnerv-small") return preset_model_config("rnerv-small", {1080, 1920}, 150);
    if (name == "rnerv-large") return preset_model_config("rnerv-large", {1080, 1920}, 128);
    throw ConfigError("no paper template named '" + name + "'");
}

HyperConfig preset_hyper_config(const std::string& name) {
    HyperConfig c;
    c.name = "hypernerv-" + name;
    if (name == "base") {
        c.hypo.fc_dim = 20;
        c.hypo.pos_dim = 16;
        c.hypo.clip_frames = 8;
        c.hypo.clip_resolution = {256, 256};
        c.hypo.layers = {
            {1, {4, 4}, 4, 4, 256},
            {3, {4, 4}, 80, 80, 240},
            {3, {4, 4}, 16, 16, 240},
            {3, {4, 4}, 0, 0, 0},
        };
        c.patch_size = 64;
        c.backbone = {720, 2880, 12, 6};
        c.masking = false;
    } else if (name == "fc16") {
        c = preset_hyper_config("base");
        c.name = "hypernerv-fc16";
        c.hypo.fc_dim = 16;
        c.hypo.layers = {
            {1, {4, 4}, 4, 4, 256},
            {3, {4, 4}, 64, 64, 288},
            {3, {4, 4}, 16, 16, 288},
            {3, {4, 4}, 0, 0, 0},
        };
    } else if (name == "mask-large") {
        c = preset_hyper_config("fc16");
        c.name = "hypernerv-mask-large";
        c.hypo.layers = {
            {1, {4, 4}, 2, 1, 256},
            {3, {4, 4}, 64, 32, 144},
            {3, {4, 4}, 8, 4, 72},
            {3, {4, 4}, 0, 0, 0},
        };
        c.masking = true;
        c.masking_ratio = 0.5;
    } else if (name == "mask-small") {
        c = preset_hyper_config("fc16");
        c.name = "hypernerv-mask-small";
        c.hypo.layers = {
            {1, {4, 4}, 0, 0, 0},
            {3, {4, 4}, 32, 16, 144},
            {3, {4, 4}, 4, 2, 72},
            {3, {4, 4}, 0, 0, 0},
        };
        c.masking = true;
        c.masking_ratio = 0.5;
    } else if (name == "desk") {
        c.hypo.fc_dim = 8;
        c.hypo.pos_dim = 8;
        c.hypo.clip_frames = 8;
        c.hypo.clip_resolution = {32, 32};
        c.hypo.layers = {
            {1, {2, 2}, 2, 1, 32},
            {3, {4, 4}, 8, 4, 36},
            {3, {4, 4}, 4, 2, 24},
        };
        c.patch_size = 16;
        c.backbone = {48, 96, 4, 2};
        c.masking = true;
        c.masking_ratio = 0.5;
    } else {
        throw ConfigError("unknown hyper preset '" + name + "'");
    }
    c.validate();
    return c;
}

std::vector<std::string> preset_hyper_names() { return {"base", "fc16", "mask-large", "mask-small", "desk"}; }

}  // namespace nervkit
