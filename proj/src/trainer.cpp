// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "nervkit/common.hpp"

namespace nervkit {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// 11-tap Gaussian depthwise kernel for the differentiable SSIM term.
Tensor ssim_kernel(std::int64_t channels) {
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    double w1d[kWin];
    double s = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        w1d[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        s += w1d[i];
    }
    for (double& v : w1d) v /= s;
    Tensor k({channels, 1, kWin, kWin});
    for (std::int64_t c = 0; c < channels; ++c)
        for (int y = 0; y < kWin; ++y)
            for (int x = 0; x < kWin; ++x) k[(c * kWin + y) * kWin + x] = w1d[y] * w1d[x];
    return k;
}

/// Mean SSIM map between two (3,H,W) vars, differentiable.
ad::Var ssim_mean(ad::Tape& t, ad::Var x, ad::Var y) {
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    std::int64_t ch = t.val(x).dim(0);
    ad::Var k = t.constant(ssim_kernel(ch));
    auto blur = [&](ad::Var v) { return ad::conv2d(t, v, k, {}, static_cast<int>(ch), 0, 0); };
    ad::Var mu_x = blur(x), mu_y = blur(y);
    ad::Var mu_x2 = ad::square(t, mu_x), mu_y2 = ad::square(t, mu_y);
    ad::Var mu_xy = ad::mul(t, mu_x, mu_y);
    ad::Var sig_x = ad::sub(t, blur(ad::square(t, x)), mu_x2);
    ad::Var sig_y = ad::sub(t, blur(ad::square(t, y)), mu_y2);
    ad::Var sig_xy = ad::sub(t, blur(ad::mul(t, x, y)), mu_xy);

    ad::Var num = ad::mul(t, ad::add_scalar(t, ad::mul_scalar(t, mu_xy, 2.0), c1),
                          ad::add_scalar(t, ad::mul_scalar(t, sig_xy, 2.0), c2));
    ad::Var den = ad::mul(t, ad::add_scalar(t, ad::add(t, mu_x2, mu_y2), c1),
                          ad::add_scalar(t, ad::add(t, sig_x, sig_y), c2));
    // den is strictly positive (sums of squares plus constants).
    ad::Var inv_den = ad::reciprocal(t, den);
    return ad::mean(t, ad::mul(t, num, inv_den));
}

}  // namespace

void TrainBudget::validate() const {
    if (!(amount > 0.0)) throw ConfigError("budget amount must be positive");
}

double lr_schedule(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps, double peak_lr) {
    if (warmup_steps >= total_steps) throw ConfigError("lr schedule: warmup must be shorter than total steps");
    if (step < 0 || step > total_steps) throw ContractViolation("lr schedule: step out of range");
    if (step <= warmup_steps) {
        if (warmup_steps == 0) return peak_lr;
        return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
    return peak_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

ad::Var reconstruction_loss(ad::Tape& tape, ad::Var pred, ad::Var target, const LossSpec& spec) {
    ad::Var diff = ad::sub(tape, pred, target);
    if (spec.kind == LossSpec::Kind::mse) return ad::mean(tape, ad::square(tape, diff));
    ad::Var l1 = ad::mean(tape, ad::abs(tape, diff));
    if (spec.alpha >= 1.0) return l1;
    ad::Var ssim_term = ad::add_scalar(tape, ad::mul_scalar(tape, ssim_mean(tape, pred, target), -1.0), 1.0);
    return ad::scale_add(tape, l1, ssim_term, spec.alpha, 1.0 - spec.alpha);
}

double reconstruction_loss_value(const VideoTensor& pred, const VideoTensor& target, const LossSpec& spec) {
    if (!pred.frames.same_shape(target.frames))
        throw ContractViolation("reconstruction_loss: shape mismatch");
    ad::Tape tape;
    double total = 0.0;
    for (std::int64_t t = 0; t < pred.num_frames(); ++t) {
        tape.clear();
        ad::Var a = tape.constant(pred.frame_chw(t));
        ad::Var b = tape.constant(target.frame_chw(t));
        total += tape.val(reconstruction_loss(tape, a, b, spec))[0];
    }
    return total / static_cast<double>(pred.num_frames());
}

void AdamOptimizer::step(ParamStore& params, const std::vector<Tensor>& grads, double lr) {
    auto& items = params.items();
    if (grads.size() != items.size()) throw ContractViolation("optimizer: gradient count mismatch");
    if (m_.empty()) {
        m_.reserve(items.size());
        v_.reserve(items.size());
        for (const auto& item : items) {
            m_.push_back(Tensor::zeros(item.value.shape()));
            v_.push_back(Tensor::zeros(item.value.shape()));
        }
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < items.size(); ++i) {
        Tensor& p = items[i].value;
        const Tensor& g = grads[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::int64_t j = 0; j < p.numel(); ++j) {
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

VideoTensor render_video(const Model& model, std::int64_t num_frames, double frame_rate, const std::string& name) {
    const auto res = model.config().target_resolution;
    Tensor frames({num_frames, res[0], res[1], 3});
    VideoTensor out;
    out.frames = std::move(frames);
    out.frame_rate = frame_rate;
    out.name = name;
    for (std::int64_t i = 0; i < num_frames; ++i) {
        double t = num_frames > 1 ? static_cast<double>(i) / static_cast<double>(num_frames - 1) : 0.0;
        out.set_frame_chw(i, model.render(t), /*clamp=*/true);
    }
    return out;
}

namespace {

struct StepContext {
    Model& model;
    const VideoTensor& video;
    const OptimSpec& optim;
    std::vector<Tensor> target_cache;  // per-frame (3,H,W)
};

/// One optimization step over the given frame indices. Returns batch loss.
double run_step(StepContext& ctx, AdamOptimizer& adam, ad::Tape& tape, const std::vector<std::int64_t>& batch,
                double lr, std::int64_t num_frames) {
    tape.clear();
    BoundParams p = ctx.model.bind(tape, true);
    ad::Var total{};
    for (std::int64_t fi : batch) {
        double t = num_frames > 1 ? static_cast<double>(fi) / static_cast<double>(num_frames - 1) : 0.0;
        ad::Var pred = ctx.model.forward(tape, p, t);
        ad::Var target = tape.constant(ctx.target_cache[fi]);
        ad::Var loss = reconstruction_loss(tape, pred, target, ctx.optim.loss);
        total = total.valid() ? ad::add(tape, total, loss) : loss;
    }
    if (batch.size() > 1) total = ad::mul_scalar(tape, total, 1.0 / static_cast<double>(batch.size()));
    double loss_value = tape.val(total)[0];
    tape.backward(total);
    std::vector<Tensor> grads;
    grads.reserve(p.vars.size());
    for (ad::Var v : p.vars) grads.push_back(tape.grad(v));
    adam.step(ctx.model.params(), grads, lr);
    return loss_value;
}

std::vector<std::vector<std::int64_t>> epoch_batches(std::int64_t num_frames, int batch_frames, Rng& rng) {
    std::vector<std::int64_t> order(num_frames);
    for (std::int64_t i = 0; i < num_frames; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::vector<std::int64_t>> batches;
    for (std::int64_t pos = 0; pos < num_frames; pos += batch_frames) {
        std::int64_t end = std::min<std::int64_t>(pos + batch_frames, num_frames);
        batches.emplace_back(order.begin() + pos, order.begin() + end);
    }
    return batches;
}

}  // namespace

TrainState train(Model& model, const VideoTensor& video, const TrainBudget& budget, const OptimSpec& optim,
                 std::uint64_t seed, const std::function<void(const EpochRow&)>& on_epoch) {
    budget.validate();
    video.validate();
    const auto res = model.config().target_resolution;
    if (res[0] != video.height() || res[1] != video.width())
        throw ConfigError("train: model resolution " + std::to_string(res[0]) + "x" + std::to_string(res[1]) +
                          " does not match video " + std::to_string(video.height()) + "x" +
                          std::to_string(video.width()));
    if (optim.batch_frames < 1) throw ConfigError("train: batch_frames must be >= 1");

    const std::int64_t num_frames = video.num_frames();
    const std::int64_t steps_per_epoch =
        (num_frames + optim.batch_frames - 1) / optim.batch_frames;

    TrainState state;
    state.flops_per_step =
        3.0 * static_cast<double>(estimate_flops(model.config())) * static_cast<double>(optim.batch_frames);

    // Schedule horizon by budget kind.
    std::int64_t total_steps = 0;
    switch (budget.kind) {
        case BudgetKind::epochs:
            total_steps = static_cast<std::int64_t>(std::llround(budget.amount)) * steps_per_epoch;
            break;
        case BudgetKind::flops:
            total_steps = static_cast<std::int64_t>(std::ceil(budget.amount / state.flops_per_step));
            break;
        case BudgetKind::wall_seconds: {
            // Probe step time on a throwaway copy so the schedule horizon is
            // set before real training starts.
            Model probe(model.config(), seed ^ 0xabcdef);
            StepContext pctx{probe, video, optim, {}};
            pctx.target_cache.reserve(num_frames);
            for (std::int64_t i = 0; i < num_frames; ++i) pctx.target_cache.push_back(video.frame_chw(i));
            AdamOptimizer padam(optim.beta1, optim.beta2, optim.eps);
            Rng prng(seed ^ 0x5eed);
            ad::Tape ptape;
            auto pbatches = epoch_batches(num_frames, optim.batch_frames, prng);
            auto t0 = Clock::now();
            int probe_steps = 0;
            for (int i = 0; i < 3 && i < static_cast<int>(pbatches.size()); ++i, ++probe_steps)
                run_step(pctx, padam, ptape, pbatches[i], optim.peak_lr * 0.01, num_frames);
            double per_step = probe_steps > 0 ? seconds_since(t0) / probe_steps : 1.0;
            total_steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(budget.amount / std::max(per_step, 1e-9)));
            break;
        }
    }
    if (total_steps < 1) throw ConfigError("train: budget resolves to zero steps");
    state.total_steps_planned = total_steps;
    std::int64_t warmup = std::min<std::int64_t>(steps_per_epoch, std::max<std::int64_t>(0, total_steps - 1));

    StepContext ctx{model, video, optim, {}};
    ctx.target_cache.reserve(num_frames);
    for (std::int64_t i = 0; i < num_frames; ++i) ctx.target_cache.push_back(video.frame_chw(i));

    AdamOptimizer adam(optim.beta1, optim.beta2, optim.eps);
    Rng rng(seed);
    ad::Tape tape;

    std::vector<Tensor> best_params;
    state.best_psnr = -std::numeric_limits<double>::infinity();

    auto t_start = Clock::now();
    bool done = false;
    double epoch_loss = 0.0;
    std::int64_t epoch_steps = 0;

    auto finish_epoch = [&]() {
        VideoTensor rec = render_video(model, num_frames, video.frame_rate, "train-eval");
        double p = psnr(rec, video);
        state.elapsed = seconds_since(t_start);
        EpochRow row{state.epoch, epoch_steps ? epoch_loss / epoch_steps : 0.0, p, state.elapsed,
                     state.flops_done, state.lr};
        state.history.push_back(row);
        if (on_epoch) on_epoch(row);
        if (p > state.best_psnr) {
            state.best_psnr = p;
            state.best_epoch = state.epoch;
            best_params.clear();
            for (const auto& item : model.params().items()) best_params.push_back(item.value);
        }
        ++state.epoch;
        epoch_loss = 0.0;
        epoch_steps = 0;
    };

    while (!done) {
        auto batches = epoch_batches(num_frames, optim.batch_frames, rng);
        for (const auto& batch : batches) {
            state.lr = lr_schedule(std::min(state.step + 1, total_steps), total_steps, warmup, optim.peak_lr);
            double loss = run_step(ctx, adam, tape, batch, state.lr, num_frames);
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss at step " + std::to_string(state.step + 1) +
                                   " (lr " + std::to_string(state.lr) + ")");
            ++state.step;
            ++epoch_steps;
            epoch_loss += loss;
            state.flops_done += state.flops_per_step;
            state.elapsed = seconds_since(t_start);

            switch (budget.kind) {
                case BudgetKind::epochs:
                    done = state.step >= total_steps;
                    break;
                case BudgetKind::wall_seconds:
                    done = state.elapsed >= budget.amount;
                    break;
                case BudgetKind::flops:
                    done = state.flops_done >= budget.amount;
                    break;
            }
            if (done) break;
        }
        if (done) state.stopped_at_s = seconds_since(t_start);
        finish_epoch();
    }

    if (!best_params.empty()) {
        auto& items = model.params().items();
        for (std::size_t i = 0; i < items.size(); ++i) items[i].value = best_params[i];
    }
    return state;
}

double calibrate_reference(const ModelConfig& reference_config, const VideoTensor& video, int epochs_sample,
                           std::uint64_t seed, const OptimSpec& optim) {
    if (epochs_sample < 1) throw ConfigError("calibrate_reference: epochs_sample must be >= 1");
    Model model(reference_config, seed);
    std::vector<double> epoch_times;
    double prev = 0.0;
    train(model, video, TrainBudget::epochs(epochs_sample), optim, seed, [&](const EpochRow& row) {
        epoch_times.push_back(row.elapsed_s - prev);
        prev = row.elapsed_s;
    });
    std::sort(epoch_times.begin(), epoch_times.end());
    std::size_t n = epoch_times.size();
    return n % 2 == 1 ? epoch_times[n / 2] : 0.5 * (epoch_times[n / 2 - 1] + epoch_times[n / 2]);
}

}  // namespace nervkit
