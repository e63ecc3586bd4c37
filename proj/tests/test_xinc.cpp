// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "nervkit/presets.hpp"
#include "nervkit/synthetic.hpp"
#include "nervkit/xinc.hpp"

using namespace nervkit;

namespace {
Tensor rand_t(Rng& rng, std::vector<std::int64_t> shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    t.fill_uniform(rng, lo, hi);
    return t;
}

Tensor direct_conv(const Tensor& x, const Tensor& w, const Tensor& b) {
    ad::Tape tape;
    int ph = static_cast<int>(w.dim(2) / 2), pw = static_cast<int>(w.dim(3) / 2);
    return tape.val(ad::conv2d(tape, tape.constant(x), tape.constant(w), tape.constant(b), 1, ph, pw));
}
}  // namespace

TEST_CASE("identity and zero head closed forms") {
    Rng rng(3);
    Tensor x = rand_t(rng, {1, 5, 7});
    Tensor ident = Tensor::from_data({1, 1, 1, 1}, {1.0});
    Tensor zero_bias = Tensor::zeros({1});
    ContributionMaps maps = conv_contributions(x, ident, zero_bias);
    REQUIRE(maps.maps.dim(0) == 1);
    for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(maps.maps[i] == x[i]);

    Tensor zeros = Tensor::zeros({2, 1, 3, 3});
    Tensor bias = Tensor::from_data({2}, {0.25, -0.5});
    ContributionMaps zmaps = conv_contributions(x, zeros, bias);
    for (std::int64_t i = 0; i < zmaps.maps.numel(); ++i) CHECK(zmaps.maps[i] == 0.0);
    Tensor view = summed_view(zmaps);
    CHECK(view.at3(0, 2, 3) == 0.25);
    CHECK(view.at3(1, 2, 3) == -0.5);
}

TEST_CASE("per-channel sums of maps plus bias reconstruct the conv output") {
    Rng rng(7);
    for (int trial = 0; trial < 15; ++trial) {
        std::int64_t cin = 1 + static_cast<std::int64_t>(rng.below(4));
        std::int64_t cout = 1 + static_cast<std::int64_t>(rng.below(4));
        int k = rng.below(2) ? 3 : 1;
        std::int64_t h = 3 + static_cast<std::int64_t>(rng.below(5));
        std::int64_t w = 3 + static_cast<std::int64_t>(rng.below(5));
        Tensor x = rand_t(rng, {cin, h, w});
        Tensor wt = rand_t(rng, {cout, cin, k, k});
        Tensor b = rand_t(rng, {cout});
        ContributionMaps maps = conv_contributions(x, wt, b);
        Tensor recon = summed_view(maps);
        Tensor truth = direct_conv(x, wt, b);
        REQUIRE(recon.same_shape(truth));
        for (std::int64_t i = 0; i < truth.numel(); ++i)
            CHECK(std::abs(recon[i] - truth[i]) <= 1e-5);
    }
}

TEST_CASE("head_contributions of a model reconstructs its pre-activation head output") {
    ModelConfig c = preset_model_config("rnerv-small", {16, 16}, 3);
    Model m(c, 9);
    double t = 0.4;
    ContributionMaps maps = head_contributions(m, t);
    Tensor recon = summed_view(maps);
    Model::HeadTap tap = m.head_tap(t);
    for (std::int64_t i = 0; i < recon.numel(); ++i) CHECK(std::abs(recon[i] - tap.pre_activation[i]) <= 1e-5);
    // the reported (activated) view matches the rendered frame
    Tensor activated = summed_view(maps, c.final_activation);
    Tensor frame = m.render(t);
    for (std::int64_t i = 0; i < frame.numel(); ++i) CHECK(activated[i] == doctest::Approx(frame[i]).epsilon(1e-9));
}

TEST_CASE("shuffle rearrangement: lattice ownership and mass preservation") {
    Rng rng(13);
    SUBCASE("stride 1 is the identity") {
        Tensor x = rand_t(rng, {2, 4, 4});
        Tensor wt = rand_t(rng, {2, 2, 3, 3});
        Tensor b = rand_t(rng, {2});
        ContributionMaps maps = conv_contributions(x, wt, b);
        Tensor moved = shuffle_contributions(maps, {1, 1});
        CHECK(moved.vec() == maps.maps.vec());
    }
    SUBCASE("stride 2 group slot 0 lands on even positions only") {
        Tensor x = rand_t(rng, {1, 3, 3});
        Tensor wt = rand_t(rng, {4, 1, 1, 1});  // cout 4 = one shuffle group
        Tensor b = rand_t(rng, {4});
        ContributionMaps maps = conv_contributions(x, wt, b);
        Tensor moved = shuffle_contributions(maps, {2, 2});
        REQUIRE(moved.shape() == std::vector<std::int64_t>{4, 6, 6});
        // kernel for output channel 0 owns (even, even)
        for (std::int64_t y = 0; y < 6; ++y)
            for (std::int64_t xx = 0; xx < 6; ++xx) {
                double v = moved.at3(0, y, xx);
                if (y % 2 == 0 && xx % 2 == 0)
                    CHECK(v == maps.maps.at3(0, y / 2, xx / 2));
                else
                    CHECK(v == 0.0);
            }
    }
    SUBCASE("each kernel owns exactly one slot per stride window, mass preserved") {
        for (int trial = 0; trial < 8; ++trial) {
            int sh = 1 + static_cast<int>(rng.below(3));
            int sw = 1 + static_cast<int>(rng.below(3));
            std::int64_t cin = 1 + static_cast<std::int64_t>(rng.below(3));
            std::int64_t groups = 1 + static_cast<std::int64_t>(rng.below(2));
            std::int64_t cout = groups * sh * sw;
            std::int64_t h = 2 + static_cast<std::int64_t>(rng.below(3));
            std::int64_t w = 2 + static_cast<std::int64_t>(rng.below(3));
            Tensor x = rand_t(rng, {cin, h, w});
            Tensor wt = rand_t(rng, {cout, cin, 3, 3});
            Tensor b = rand_t(rng, {cout});
            ContributionMaps maps = conv_contributions(x, wt, b);
            Tensor moved = shuffle_contributions(maps, {sh, sw});
            // ownership: exactly one nonzero-capable slot per window per kernel
            for (std::int64_t k = 0; k < moved.dim(0); ++k)
                for (std::int64_t wy = 0; wy < h; ++wy)
                    for (std::int64_t wx = 0; wx < w; ++wx) {
                        int slots = 0;
                        for (int dy = 0; dy < sh; ++dy)
                            for (int dx = 0; dx < sw; ++dx)
                                if (moved.at3(k, wy * sh + dy, wx * sw + dx) != 0.0) ++slots;
                        CHECK(slots <= 1);
                    }
            // mass preserved
            CHECK(moved.sum() == doctest::Approx(maps.maps.sum()).epsilon(1e-12));

            // grouped sums equal the shuffled direct output
            Tensor direct = direct_conv(x, wt, b);
            Tensor shuffled = ad::pixel_shuffle_tensor(direct, sh, sw);
            Tensor sums({shuffled.dim(0), shuffled.dim(1), shuffled.dim(2)});
            for (std::int64_t k = 0; k < moved.dim(0); ++k) {
                std::int64_t co = maps.kernel_index[k][1];
                std::int64_t final_c = co / (sh * sw);
                for (std::int64_t i = 0; i < moved.dim(1) * moved.dim(2); ++i)
                    sums[final_c * moved.dim(1) * moved.dim(2) + i] += moved[k * moved.dim(1) * moved.dim(2) + i];
            }
            // add the shuffled per-channel bias
            for (std::int64_t co = 0; co < cout; ++co) {
                std::int64_t final_c = co / (sh * sw);
                std::int64_t rem = co % (sh * sw);
                std::int64_t dy = rem / sw, dx = rem % sw;
                for (std::int64_t y = 0; y < h; ++y)
                    for (std::int64_t xx = 0; xx < w; ++xx)
                        sums.at3(final_c, y * sh + dy, xx * sw + dx) += b[co];
            }
            for (std::int64_t i = 0; i < shuffled.numel(); ++i)
                CHECK(std::abs(sums[i] - shuffled[i]) <= 1e-5);
        }
    }
}

TEST_CASE("sort_by_magnitude ordering and stability") {
    Tensor zeros = Tensor::zeros({4, 2, 2});
    auto order = sort_by_magnitude(zeros);
    CHECK(order == std::vector<std::int64_t>{0, 1, 2, 3});

    Tensor maps = Tensor::zeros({3, 2, 2});
    maps[1 * 4 + 0] = 100.0;  // dominant kernel 1
    maps[0 * 4 + 0] = 1.0;
    maps[2 * 4 + 0] = -1.0;  // same magnitude as kernel 0
    auto order2 = sort_by_magnitude(maps);
    CHECK(order2[0] == 1);
    CHECK(order2[1] == 0);  // tie broken by kernel index
    CHECK(order2[2] == 2);

    // permutation property
    Rng rng(19);
    Tensor rnd = rand_t(rng, {7, 3, 3});
    auto p = sort_by_magnitude(rnd);
    std::vector<bool> seen(7, false);
    for (auto i : p) {
        CHECK(!seen[i]);
        seen[i] = true;
    }
}

TEST_CASE("motion fluctuation") {
    ModelConfig c = preset_model_config("nerv", {16, 16});
    Model m(c, 21);
    ContributionMaps a = head_contributions(m, 0.25);
    ContributionMaps b = head_contributions(m, 0.50);

    // identical maps give a zero fluctuation
    Tensor zero = motion_fluctuation(a, a);
    for (std::int64_t i = 0; i < zero.numel(); ++i) CHECK(zero[i] == 0.0);

    // localized change is supported only where it happened
    ContributionMaps shifted = a;
    shifted.maps.at3(0, 2, 3) += 1.0;
    Tensor local = motion_fluctuation(a, shifted);
    for (std::int64_t y = 0; y < local.dim(0); ++y)
        for (std::int64_t x = 0; x < local.dim(1); ++x)
            CHECK(local.at2(y, x) == ((y == 2 && x == 3) ? 1.0 : 0.0));

    Tensor fluct = motion_fluctuation(a, b);
    CHECK(fluct.all_finite());

    ContributionMaps tiny = conv_contributions(Tensor::zeros({1, 2, 2}), Tensor::zeros({1, 1, 1, 1}),
                                               Tensor::zeros({1}));
    CHECK_THROWS_AS(motion_fluctuation(a, tiny), ContractViolation);
}

TEST_CASE("hypo head dissection is computable for both transition kinds") {
    HyperConfig cfg = preset_hyper_config("desk");
    HyperNet net(cfg, 23);
    auto clips = make_synthetic_clips(2, cfg.hypo.clip_frames, 32, 32, 25);
    auto tok_a = net.predict_tokens_value(clips[0]);
    auto tok_b = net.predict_tokens_value(clips[1]);

    // within-clip transition
    ContributionMaps f0 = hypo_head_contributions(net, tok_a, false, 0);
    ContributionMaps f1 = hypo_head_contributions(net, tok_a, false, 1);
    Tensor within = motion_fluctuation(f0, f1);
    CHECK(within.all_finite());

    // clip-boundary transition: last frame of clip A to first frame of clip B
    ContributionMaps last_a = hypo_head_contributions(net, tok_a, false, cfg.hypo.clip_frames - 1);
    ContributionMaps first_b = hypo_head_contributions(net, tok_b, false, 0);
    Tensor boundary = motion_fluctuation(last_a, first_b);
    CHECK(boundary.all_finite());

    // shuffle metadata present; rearranged maps land on the output lattice
    CHECK(f0.has_shuffle);
    Tensor moved = shuffle_contributions(f0, f0.stride);
    CHECK(moved.dim(1) == f0.maps.dim(1) * f0.stride[0]);
}
