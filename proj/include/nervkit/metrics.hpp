// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nervkit/video.hpp"

namespace nervkit {

/// How to aggregate PSNR across frames. NeRV evaluation conventionally
/// averages per-frame MSE first and takes one log; the mean-of-per-frame-PSNR
/// alternative is also provided since papers rarely say which they use.
enum class PsnrMode { average_mse, average_psnr };

/// Peak signal-to-noise ratio over [0,1]-range video, in dB.
/// Returns +infinity for an exact reconstruction.
double psnr(const VideoTensor& pred, const VideoTensor& target, PsnrMode mode = PsnrMode::average_mse);

/// Per-frame PSNR values.
std::vector<double> psnr_per_frame(const VideoTensor& pred, const VideoTensor& target);

/// Single-scale SSIM with an 11-tap Gaussian (sigma 1.5) window, mean over
/// channels and frames. Exposed for tests and as the loss building block.
double ssim(const VideoTensor& pred, const VideoTensor& target);

/// Five-scale MS-SSIM, standard weights (0.0448, 0.2856, 0.3001, 0.2363,
/// 0.1333), mean over frames. Frames must be at least 176x176 so the
/// coarsest scale still fits the 11-tap window.
double ms_ssim(const VideoTensor& pred, const VideoTensor& target);

std::vector<double> ms_ssim_per_frame(const VideoTensor& pred, const VideoTensor& target);

/// Minimum frame side length for the 5-scale pyramid (11 * 2^4).
constexpr std::int64_t kMsSsimMinSide = 176;

/// Whether frames of the given size can be scored with ms_ssim.
bool ms_ssim_supported(std::int64_t h, std::int64_t w);

/// Cap applied when writing PSNR into reports so files stay numeric.
constexpr double kPsnrReportCap = 99.0;
double psnr_for_report(double psnr_db);

MetricReport evaluate(const VideoTensor& pred, const VideoTensor& target, bool with_ms_ssim = true,
                      PsnrMode mode = PsnrMode::average_mse);

}  // namespace nervkit
