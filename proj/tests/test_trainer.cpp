// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "nervkit/synthetic.hpp"
#include "nervkit/trainer.hpp"

using namespace nervkit;

namespace {
ModelConfig desk_config(std::array<std::int64_t, 2> res, int grid_frames) {
    ModelConfig c;
    c.encoding = {EncodingKind::temporal_grid, 1.25, 0, grid_frames, {res[0] / 4, res[1] / 4, 6}};
    c.stem.kind = StemKind::stemless;
    BlockSpec b1, b2;
    b1.kind = BlockKind::ffnerv_double;
    b1.stride = {2, 2};
    b2.kind = BlockKind::ffnerv_double;
    b2.stride = {2, 2};
    c.blocks = {b1, b2};
    c.skip.kind = SkipKind::t_skip;
    c.skip.fuse = FuseKind::affine_modulate;
    c.skip.norm_before_fuse = true;
    c.skip.t_length = 8;
    c.expansion = 2.0;
    c.reduction = 1.2;
    c.target_resolution = res;
    return c;
}
}  // namespace

TEST_CASE("lr schedule shape") {
    const double peak = 3e-3;
    CHECK(lr_schedule(0, 100, 10, peak) == 0.0);
    CHECK(lr_schedule(10, 100, 10, peak) == doctest::Approx(peak));
    CHECK(lr_schedule(100, 100, 10, peak) == doctest::Approx(0.0).scale(1.0));
    CHECK(lr_schedule(10 + 45, 100, 10, peak) == doctest::Approx(peak / 2));

    // continuity at the junction and nonnegativity everywhere
    double before = lr_schedule(10, 1000, 10, peak);
    double after = lr_schedule(11, 1000, 10, peak);
    CHECK(std::abs(before - after) < peak * 0.01);
    for (int s = 0; s <= 1000; s += 7) CHECK(lr_schedule(s, 1000, 10, peak) >= 0.0);

    CHECK_THROWS_AS(lr_schedule(0, 10, 10, peak), ConfigError);
}

TEST_CASE("reconstruction loss closed forms") {
    VideoTensor a = make_synthetic_video(2, 16, 16, 1);
    LossSpec mse;
    CHECK(reconstruction_loss_value(a, a, mse) == 0.0);
    LossSpec l1s;
    l1s.kind = LossSpec::Kind::l1_ssim;
    l1s.alpha = 0.7;
    CHECK(reconstruction_loss_value(a, a, l1s) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    // mse on a constant error e is e^2
    VideoTensor lo(Tensor::full({1, 12, 12, 3}, 0.4));
    VideoTensor hi(Tensor::full({1, 12, 12, 3}, 0.6));
    CHECK(reconstruction_loss_value(hi, lo, mse) == doctest::Approx(0.04).epsilon(1e-12));

    // l1_ssim with alpha = 1 degenerates to mean absolute error
    LossSpec pure_l1;
    pure_l1.kind = LossSpec::Kind::l1_ssim;
    pure_l1.alpha = 1.0;
    CHECK(reconstruction_loss_value(hi, lo, pure_l1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("l1_ssim loss is differentiable and decreases under training") {
    VideoTensor video = make_synthetic_video(2, 16, 16, 5);
    Model model(desk_config({16, 16}, 2), 3);
    OptimSpec opt;
    opt.peak_lr = 2e-3;
    opt.batch_frames = 2;
    opt.loss.kind = LossSpec::Kind::l1_ssim;
    opt.loss.alpha = 0.7;
    VideoTensor before = render_video(model, video.num_frames());
    double loss0 = reconstruction_loss_value(before, video, opt.loss);
    TrainState st = train(model, video, TrainBudget::epochs(30), opt, 7);
    VideoTensor after = render_video(model, video.num_frames());
    CHECK(reconstruction_loss_value(after, video, opt.loss) < loss0);
    CHECK(st.best_epoch >= 0);
}

TEST_CASE("adam first step follows the sign of the gradient") {
    ModelConfig c = desk_config({8, 8}, 2);
    Model m(c, 1);
    AdamOptimizer adam(0.9, 0.999, 1e-8);
    std::vector<Tensor> grads;
    for (auto& item : m.params().items()) {
        Tensor g(item.value.shape());
        g.fill(2.5);  // arbitrary positive gradient
        grads.push_back(g);
    }
    Tensor before = m.params().items()[0].value;
    adam.step(m.params(), grads, 1e-2);
    const Tensor& after = m.params().items()[0].value;
    for (std::int64_t i = 0; i < before.numel(); ++i)
        CHECK(after[i] == doctest::Approx(before[i] - 1e-2).epsilon(1e-6));
}

TEST_CASE("training improves over initialization and keeps the best checkpoint") {
    VideoTensor video = make_synthetic_video(4, 16, 16, 9);
    Model model(desk_config({16, 16}, 2), 11);
    LossSpec mse;
    double init_loss = reconstruction_loss_value(render_video(model, 4), video, mse);
    OptimSpec opt;
    opt.peak_lr = 3e-3;
    opt.batch_frames = 2;
    TrainState state = train(model, video, TrainBudget::epochs(40), opt, 13);
    double best_loss = reconstruction_loss_value(render_video(model, 4), video, mse);
    CHECK(best_loss < init_loss);
    CHECK(state.epoch == 40);
    CHECK(state.step == 40 * 2);  // 4 frames / batch 2
    CHECK(state.history.size() == 40);
    CHECK(state.best_psnr >= state.history.front().psnr);
    // elapsed and flops are nondecreasing across epoch rows
    for (std::size_t i = 1; i < state.history.size(); ++i) {
        CHECK(state.history[i].elapsed_s >= state.history[i - 1].elapsed_s);
        CHECK(state.history[i].flops_done >= state.history[i - 1].flops_done);
    }
}

TEST_CASE("fixed seed gives bitwise-identical checkpoints") {
    VideoTensor video = make_synthetic_video(3, 16, 16, 21);
    OptimSpec opt;
    opt.peak_lr = 1e-3;
    opt.batch_frames = 1;
    Model a(desk_config({16, 16}, 2), 5);
    Model b(desk_config({16, 16}, 2), 5);
    train(a, video, TrainBudget::epochs(5), opt, 42);
    train(b, video, TrainBudget::epochs(5), opt, 42);
    auto& ia = a.params().items();
    auto& ib = b.params().items();
    for (std::size_t i = 0; i < ia.size(); ++i) CHECK(ia[i].value.vec() == ib[i].value.vec());
}

TEST_CASE("budget validation and stop rules") {
    VideoTensor video = make_synthetic_video(2, 8, 8, 2);
    Model model(desk_config({8, 8}, 2), 2);
    OptimSpec opt;
    opt.batch_frames = 1;

    CHECK_THROWS_AS(TrainBudget::epochs(0).validate(), ConfigError);
    CHECK_THROWS_AS(train(model, video, TrainBudget::epochs(-1), opt, 0), ConfigError);

    // flops budget: 2.5 steps' worth stops after the third whole step
    std::int64_t per_frame = estimate_flops(model.config());
    TrainBudget fb = TrainBudget::flops(2.5 * 3.0 * static_cast<double>(per_frame));
    Model m2(desk_config({8, 8}, 2), 2);
    TrainState st = train(m2, video, fb, opt, 0);
    CHECK(st.step == 3);
    CHECK(st.flops_done >= fb.amount);

    // wall budget: stops at the first whole step past the budget
    TrainBudget wb = TrainBudget::wall_seconds(0.15);
    Model m3(desk_config({8, 8}, 2), 2);
    TrainState st2 = train(m3, video, wb, opt, 0);
    CHECK(st2.elapsed >= wb.amount);

    // resolution mismatch is a config error
    VideoTensor big = make_synthetic_video(2, 16, 16, 2);
    CHECK_THROWS_AS(train(model, big, TrainBudget::epochs(1), opt, 0), ConfigError);
}

TEST_CASE("aborts with diagnostics on a non-finite loss") {
    VideoTensor video = make_synthetic_video(2, 8, 8, 4);
    ModelConfig c = desk_config({8, 8}, 2);
    c.final_activation = FinalActivation::add_half;  // unbounded output
    Model model(c, 6);
    OptimSpec opt;
    opt.peak_lr = 1e200;
    opt.batch_frames = 1;
    CHECK_THROWS_AS(train(model, video, TrainBudget::epochs(50), opt, 1), NumericError);
}

TEST_CASE("calibrate_reference returns a positive per-epoch time") {
    VideoTensor video = make_synthetic_video(2, 8, 8, 8);
    ModelConfig c = desk_config({8, 8}, 2);
    OptimSpec opt;
    opt.batch_frames = 1;
    double s = calibrate_reference(c, video, 3, 0, opt);
    CHECK(s > 0.0);
    CHECK(std::isfinite(s));
    // a "x300"-style budget resolves by plain multiplication
    CHECK(TrainBudget::wall_seconds(s * 300, "nerv:300").amount == doctest::Approx(300.0 * s));
    CHECK_THROWS_AS(calibrate_reference(c, video, 0, 0, opt), ConfigError);
}
