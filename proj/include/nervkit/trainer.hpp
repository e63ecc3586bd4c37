// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Budget-aware per-video INR fitting: reconstruction losses, Adam with warmup
// plus cosine annealing, and stop conditions in epochs, seconds or FLOPs.

#pragma once

#include <functional>
#include <optional>

#include "nervkit/budget.hpp"
#include "nervkit/components.hpp"
#include "nervkit/metrics.hpp"
#include "nervkit/video.hpp"

namespace nervkit {

enum class BudgetKind { epochs, wall_seconds, flops };

struct TrainBudget {
    BudgetKind kind = BudgetKind::epochs;
    double amount = 0.0;
    /// Informational: "name:epochs" string this budget was resolved from.
    std::string reference;

    static TrainBudget epochs(double n) { return {BudgetKind::epochs, n, ""}; }
    static TrainBudget wall_seconds(double s, std::string ref = "") { return {BudgetKind::wall_seconds, s, std::move(ref)}; }
    static TrainBudget flops(double f) { return {BudgetKind::flops, f, ""}; }

    void validate() const;
};

struct LossSpec {
    enum class Kind { mse, l1_ssim };
    Kind kind = Kind::mse;
    double alpha = 0.7;  // l1_ssim: alpha*L1 + (1-alpha)*(1-SSIM)
};

struct OptimSpec {
    double peak_lr = 2e-3;
    int batch_frames = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    LossSpec loss;
};

struct EpochRow {
    std::int64_t epoch = 0;
    double loss = 0.0;
    double psnr = 0.0;
    double elapsed_s = 0.0;
    double flops_done = 0.0;
    double lr = 0.0;
};

struct TrainState {
    std::int64_t step = 0;
    std::int64_t epoch = 0;
    double elapsed = 0.0;
    double stopped_at_s = 0.0;  // wall time when the budget fired, before the final eval
    double flops_done = 0.0;
    double lr = 0.0;
    std::vector<EpochRow> history;
    double best_psnr = 0.0;
    std::int64_t best_epoch = -1;
    std::int64_t total_steps_planned = 0;
    double flops_per_step = 0.0;
};

/// Linear ramp 0 -> peak over [0, warmup], then cosine decay peak -> 0 at
/// total_steps. Continuous at the junction.
double lr_schedule(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps, double peak_lr);

/// Differentiable per-frame loss; pred and target are (3,H,W) Vars (target is
/// typically a constant leaf).
ad::Var reconstruction_loss(ad::Tape& tape, ad::Var pred, ad::Var target, const LossSpec& spec);

/// Plain evaluation over whole videos (used by tests and reports).
double reconstruction_loss_value(const VideoTensor& pred, const VideoTensor& target, const LossSpec& spec);

class AdamOptimizer {
public:
    AdamOptimizer(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}
    /// In-place update; grads aligned with store order.
    void step(ParamStore& params, const std::vector<Tensor>& grads, double lr);

private:
    double beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

/// Fit a model to a video within the budget. Stops at the first whole step
/// where the budget is exhausted; the model is left at its best-PSNR epoch
/// checkpoint. Deterministic given a seed for epoch/flops budgets.
TrainState train(Model& model, const VideoTensor& video, const TrainBudget& budget, const OptimSpec& optim,
                 std::uint64_t seed = 0, const std::function<void(const EpochRow&)>& on_epoch = {});

/// Median wall seconds per epoch over epochs_sample short epochs of the
/// reference config on the given video.
double calibrate_reference(const ModelConfig& reference_config, const VideoTensor& video, int epochs_sample,
                           std::uint64_t seed = 0, const OptimSpec& optim = {});

/// Render every frame of the video's timeline (clamped to [0,1]).
VideoTensor render_video(const Model& model, std::int64_t num_frames, double frame_rate = 0.0,
                         const std::string& name = "render");

}  // namespace nervkit
