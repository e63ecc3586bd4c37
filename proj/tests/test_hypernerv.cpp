// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "nervkit/config_io.hpp"
#include "nervkit/hypernerv.hpp"
#include "nervkit/presets.hpp"
#include "nervkit/synthetic.hpp"

using namespace nervkit;

TEST_CASE("unique parameter accounting matches the published layouts") {
    HypoLayout base = preset_hyper_config("base").hypo;
    CHECK(base.unique_params(false) == 24064);
    CHECK(base.unique_params(true) == 24064);  // min == max without masking

    HypoLayout fc16 = preset_hyper_config("fc16").hypo;
    CHECK(fc16.unique_params(false) == 24064);

    HypoLayout large = preset_hyper_config("mask-large").hypo;
    CHECK(large.unique_params(true) == 5152);
    CHECK(large.unique_params(false) == 10304);

    HypoLayout small = preset_hyper_config("mask-small").hypo;
    CHECK(small.unique_params(true) == 2448);
    CHECK(small.unique_params(false) == 4896);
}

TEST_CASE("token block prediction shapes follow the layout") {
    HyperConfig cfg = preset_hyper_config("desk");
    HyperNet net(cfg, 3);
    VideoTensor clip = make_synthetic_clips(1, cfg.hypo.clip_frames, 32, 32, 5)[0];

    // 8 frames x (32/16)^2 patches = 32 video tokens
    Tensor tokens = net.tokenize_clip(clip);
    CHECK(tokens.shape() == std::vector<std::int64_t>{32, 16 * 16 * 3});
    CHECK(cfg.video_tokens_per_clip() == 32);

    // identical clips produce identical tokens
    Tensor tokens2 = net.tokenize_clip(clip);
    CHECK(tokens.vec() == tokens2.vec());

    std::vector<Tensor> preds = net.predict_tokens_value(clip);
    REQUIRE(preds.size() == 3);  // all three desk layers are modulated
    CHECK(preds[0].shape() == std::vector<std::int64_t>{2, 32});
    CHECK(preds[1].shape() == std::vector<std::int64_t>{8, 36});
    CHECK(preds[2].shape() == std::vector<std::int64_t>{4, 24});
}

TEST_CASE("patch equal to the frame size gives one token per frame") {
    HyperConfig cfg = preset_hyper_config("desk");
    cfg.patch_size = 32;
    cfg.validate();
    HyperNet net(cfg, 1);
    VideoTensor clip = make_synthetic_clips(1, cfg.hypo.clip_frames, 32, 32, 9)[0];
    CHECK(net.tokenize_clip(clip).dim(0) == cfg.hypo.clip_frames);
}

TEST_CASE("frame dims not divisible by the patch size are rejected") {
    HyperConfig cfg = preset_hyper_config("desk");
    cfg.patch_size = 12;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("divisible"), ConfigError);
}

TEST_CASE("layout validation enforces tiling integrality") {
    HyperConfig cfg = preset_hyper_config("desk");
    cfg.hypo.layers[1].token_count_max = 7;  // 7*36 does not divide 9216
    cfg.hypo.layers[1].token_count_min = 7;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("multiple"), ConfigError);

    HyperConfig bad_mask = preset_hyper_config("desk");
    bad_mask.hypo.layers[1].token_count_min = 3;  // neither max nor max/2
    CHECK_THROWS_AS(bad_mask.validate(), ConfigError);

    HyperConfig bad_up = preset_hyper_config("desk");
    bad_up.hypo.layers[0].upscale = {3, 3};
    CHECK_THROWS_AS(bad_up.validate(), ConfigError);
}

TEST_CASE("modulation semantics") {
    HyperConfig cfg = preset_hyper_config("desk");
    HyperNet net(cfg, 7);
    const HypoLayout& hy = cfg.hypo;
    const std::size_t head = hy.layers.size() - 1;
    const std::int64_t cout = hy.conv_channels(head);
    const std::int64_t row = hy.layer_weight_count(head) / cout;

    std::vector<Tensor> tokens;
    for (std::size_t i : net.modulated_layers())
        tokens.push_back(Tensor::full({hy.layers[i].token_count_max, hy.layers[i].token_dim}, 1.0));

    SUBCASE("ones times ones, gain sqrt(row) recovers all-ones weights") {
        net.params().get("hypo.layer" + std::to_string(head) + ".weight").fill(1.0);  // shared head weight
        net.params().get("hypo.layer" + std::to_string(head) + ".gain").fill(std::sqrt(static_cast<double>(row)));
        HyperNet::HeadTap tap = net.head_tap(tokens, false, 0);
        for (std::int64_t i = 0; i < tap.weight.numel(); ++i)
            CHECK(tap.weight[i] == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("zero tokens give zero weights under the epsilon guard") {
        std::vector<Tensor> zeros = tokens;
        zeros.back().fill(0.0);
        HyperNet::HeadTap tap = net.head_tap(zeros, false, 0);
        for (std::int64_t i = 0; i < tap.weight.numel(); ++i) CHECK(tap.weight[i] == 0.0);
    }

    SUBCASE("positive rescaling of tokens leaves normalized weights unchanged") {
        HyperNet::HeadTap a = net.head_tap(tokens, false, 0);
        std::vector<Tensor> scaled = tokens;
        for (Tensor& t : scaled)
            for (std::int64_t i = 0; i < t.numel(); ++i) t[i] *= 3.7;
        HyperNet::HeadTap b = net.head_tap(scaled, false, 0);
        for (std::int64_t i = 0; i < a.weight.numel(); ++i)
            CHECK(b.weight[i] == doctest::Approx(a.weight[i]).epsilon(1e-5));
    }
}

TEST_CASE("masked decode reads only the kept tokens") {
    HyperConfig cfg = preset_hyper_config("desk");
    HyperNet net(cfg, 11);
    VideoTensor clip = make_synthetic_clips(1, cfg.hypo.clip_frames, 32, 32, 13)[0];
    std::vector<Tensor> tokens = net.predict_tokens_value(clip);

    // zeroing the dropped tokens before a masked decode changes nothing
    std::vector<Tensor> zeroed = apply_mask(tokens, cfg.hypo, true);
    VideoTensor full_masked = net.reconstruct(tokens, true);
    VideoTensor zeroed_masked = net.reconstruct(zeroed, true);
    CHECK(full_masked.frames.vec() == zeroed_masked.frames.vec());

    // mask off is the identity
    std::vector<Tensor> untouched = apply_mask(tokens, cfg.hypo, false);
    for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(untouched[i].vec() == tokens[i].vec());

    // masked and unmasked decodes differ (the dropped half carries signal)
    VideoTensor unmasked = net.reconstruct(tokens, false);
    CHECK(unmasked.frames.vec() != full_masked.frames.vec());

    // output shape is the full clip at clip resolution
    CHECK(unmasked.frames.shape() == std::vector<std::int64_t>{8, 32, 32, 3});
}

TEST_CASE("clip bitstream round trip and masking storage") {
    HyperConfig cfg = preset_hyper_config("desk");
    HyperNet net(cfg, 17);
    std::string hash = config_hash(cfg);
    VideoTensor clip = make_synthetic_clips(1, cfg.hypo.clip_frames, 32, 32, 19)[0];

    for (bool mask : {false, true}) {
        CAPTURE(mask);
        ClipBitstream stream = encode_clip(net, clip, mask, 8, hash);
        // container round trip is bit-exact
        auto bytes = stream.serialize();
        ClipBitstream parsed = ClipBitstream::deserialize(bytes);
        CHECK(parsed.serialize() == bytes);

        // stored token counts: exactly min when masked, max otherwise
        std::int64_t stored = 0;
        std::size_t li = 0;
        for (std::size_t i : net.modulated_layers()) {
            std::int64_t expect = mask ? cfg.hypo.layers[i].token_count_min : cfg.hypo.layers[i].token_count_max;
            CHECK(parsed.layers[li].count == expect);
            stored += parsed.layers[li].count * parsed.layers[li].dim;
            ++li;
        }
        CHECK(stored == cfg.hypo.unique_params(mask));

        // decode equals a direct hypo forward on the dequantized tokens
        VideoTensor decoded = decode_clip(net, parsed, hash);
        VideoTensor direct = net.reconstruct(decode_tokens(parsed), mask);
        CHECK(decoded.frames.vec() == direct.frames.vec());
    }

    // masked payload is roughly half the unmasked payload
    std::size_t masked_size = encode_clip(net, clip, true, 8, hash).byte_size();
    std::size_t full_size = encode_clip(net, clip, false, 8, hash).byte_size();
    CHECK(masked_size < full_size);

    // layout hash mismatch is refused
    ClipBitstream stream = encode_clip(net, clip, false, 8, hash);
    CHECK_THROWS_AS(decode_clip(net, stream, "deadbeef"), DataError);
}

TEST_CASE("hyper training reduces reconstruction loss") {
    HyperConfig cfg = preset_hyper_config("desk");
    HyperNet net(cfg, 23);
    std::vector<VideoTensor> clips = make_synthetic_clips(4, cfg.hypo.clip_frames, 32, 32, 29);
    HyperTrainOptions opts;
    opts.steps = 40;
    opts.batch_clips = 2;
    opts.lr = 3e-4;
    opts.seed = 31;
    HyperTrainResult result = hyper_train(net, clips, opts);
    REQUIRE(result.loss_history.size() == 40);
    double first = result.loss_history.front();
    double last = result.loss_history.back();
    CHECK(last < first);
    CHECK(std::isfinite(last));
}

TEST_CASE("gradients flow through the full hyper pipeline") {
    // Small but complete: backbone attention, token FCs, modulation with
    // masking, hypo convs. Checked against central differences on a few
    // randomly picked parameters (full finite differencing would be slow).
    HyperConfig cfg = preset_hyper_config("desk");
    cfg.hypo.clip_resolution = {16, 16};
    cfg.patch_size = 8;
    cfg.hypo.layers = {{1, {2, 2}, 2, 1, 16}, {3, {4, 4}, 4, 2, 18}, {3, {2, 2}, 2, 1, 12}};
    cfg.validate();
    HyperNet net(cfg, 37);
    VideoTensor clip = make_synthetic_clips(1, cfg.hypo.clip_frames, 16, 16, 41)[0];
    Tensor video_tokens = net.tokenize_clip(clip);
    Tensor target = clip.frame_chw(2);

    auto loss_value = [&](bool masked) {
        ad::Tape tape;
        BoundParams p = net.bind(tape, false);
        auto tokens = net.predict_tokens(tape, p, video_tokens);
        ad::Var pred = net.hypo_forward(tape, p, tokens, masked, 2);
        ad::Var l = ad::mean(tape, ad::square(tape, ad::sub(tape, pred, tape.constant(target))));
        return tape.val(l)[0];
    };

    for (bool masked : {false, true}) {
        ad::Tape tape;
        BoundParams p = net.bind(tape, true);
        auto tokens = net.predict_tokens(tape, p, video_tokens);
        ad::Var pred = net.hypo_forward(tape, p, tokens, masked, 2);
        ad::Var l = ad::mean(tape, ad::square(tape, ad::sub(tape, pred, tape.constant(target))));
        tape.backward(l);

        Rng rng(43);
        int checked = 0;
        auto& items = net.params().items();
        for (int probe = 0; probe < 24; ++probe) {
            std::size_t pi = static_cast<std::size_t>(rng.below(items.size()));
            Tensor& tensor = items[pi].value;
            std::int64_t ei = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(tensor.numel())));
            double keep = tensor[ei];
            const double eps = 1e-4;
            tensor[ei] = keep + eps;
            double fp = loss_value(masked);
            tensor[ei] = keep - eps;
            double fm = loss_value(masked);
            tensor[ei] = keep;
            double numeric = (fp - fm) / (2 * eps);
            double analytic = tape.grad(p.vars[pi])[ei];
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
            CAPTURE(items[pi].name);
            CHECK(std::abs(numeric - analytic) / denom < 2e-3);
            ++checked;
        }
        CHECK(checked == 24);
    }
}
