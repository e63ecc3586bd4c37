// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "nervkit/metrics.hpp"
#include "nervkit/rng.hpp"
#include "nervkit/synthetic.hpp"

using namespace nervkit;

namespace {

// Deterministic smooth patterns shared with the frozen reference values
// below (computed once with an independent MS-SSIM implementation).
VideoTensor pattern(std::int64_t h, std::int64_t w, char kind) {
    Tensor frames({1, h, w, 3});
    for (std::int64_t y = 0; y < h; ++y) {
        double v = static_cast<double>(y) / (h - 1);
        for (std::int64_t x = 0; x < w; ++x) {
            double u = static_cast<double>(x) / (w - 1);
            for (int c = 0; c < 3; ++c) {
                double val = 0.0;
                if (kind == 'a') {
                    val = 0.5 + 0.3 * std::sin(2 * M_PI * (3 * u + 5 * v) + c) +
                          0.15 * std::cos(2 * M_PI * 7 * u * v + 2 * c);
                } else if (kind == 'b') {
                    val = 0.5 + 0.3 * std::sin(2 * M_PI * (3 * u + 5 * v) + c) +
                          0.15 * std::cos(2 * M_PI * 7 * u * v + 2 * c) +
                          0.1 * std::sin(2 * M_PI * (2 * u + 3 * v) + 1.0 + c);
                } else {  // high-contrast checkerboard, 8px tiles
                    std::int64_t tx = static_cast<std::int64_t>(std::floor(u * (w - 1) / 8));
                    std::int64_t ty = static_cast<std::int64_t>(std::floor(v * (h - 1) / 8));
                    val = static_cast<double>((tx + ty) % 2);
                }
                frames[((y * w) + x) * 3 + c] = std::clamp(val, 0.0, 1.0);
            }
        }
    }
    VideoTensor out;
    out.frames = std::move(frames);
    return out;
}

VideoTensor inverted(const VideoTensor& v) {
    VideoTensor out = v;
    for (std::int64_t i = 0; i < out.frames.numel(); ++i) out.frames[i] = 1.0 - out.frames[i];
    return out;
}

}  // namespace

TEST_CASE("psnr closed forms") {
    VideoTensor target = make_synthetic_video(2, 16, 16, 3);
    CHECK(std::isinf(psnr(target, target)));

    // uniform error with MSE 0.01 -> 20 dB
    VideoTensor half(Tensor::full({1, 8, 8, 3}, 0.5));
    VideoTensor off(Tensor::full({1, 8, 8, 3}, 0.6));
    CHECK(psnr(off, half) == doctest::Approx(20.0).epsilon(1e-9));

    // all-0.5 vs all-0: MSE 0.25 -> ~6.0206 dB
    VideoTensor zeros(Tensor::full({1, 8, 8, 3}, 0.0));
    CHECK(psnr(half, zeros) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-9));

    CHECK_THROWS_AS(psnr(half, target), ContractViolation);
    CHECK(psnr_for_report(std::numeric_limits<double>::infinity()) == kPsnrReportCap);
}

TEST_CASE("psnr aggregation modes and symmetry") {
    VideoTensor a = make_synthetic_video(4, 24, 24, 1);
    VideoTensor b = make_synthetic_video(4, 24, 24, 2);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-12));

    double mode_mse = psnr(a, b, PsnrMode::average_mse);
    double mode_psnr = psnr(a, b, PsnrMode::average_psnr);
    CHECK(mode_mse > 0);
    // Jensen: mean of per-frame PSNR >= PSNR of mean MSE
    CHECK(mode_psnr >= mode_mse - 1e-9);

    // strictly decreasing in MSE
    VideoTensor c = a;
    for (std::int64_t i = 0; i < c.frames.numel(); ++i) c.frames[i] = std::clamp(c.frames[i] + 0.05, 0.0, 1.0);
    VideoTensor d = a;
    for (std::int64_t i = 0; i < d.frames.numel(); ++i) d.frames[i] = std::clamp(d.frames[i] + 0.10, 0.0, 1.0);
    CHECK(psnr(c, a) > psnr(d, a));
}

TEST_CASE("psnr is permutation-invariant over pixels") {
    VideoTensor a = make_synthetic_video(1, 12, 12, 11);
    VideoTensor b = make_synthetic_video(1, 12, 12, 12);
    double before = psnr(a, b);
    // Apply the same pixel permutation (reversal) to both.
    VideoTensor ar = a, br = b;
    std::int64_t n = a.frames.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        ar.frames[i] = a.frames[n - 1 - i];
        br.frames[i] = b.frames[n - 1 - i];
    }
    CHECK(psnr(ar, br) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("ms_ssim matches the reference implementation") {
    VideoTensor a = pattern(192, 192, 'a');
    VideoTensor b = pattern(192, 192, 'b');

    CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    // Frozen from an independent reference implementation on these patterns.
    CHECK(ms_ssim(a, b) == doctest::Approx(0.956729).epsilon(2e-3));
    CHECK(ssim(a, b) == doctest::Approx(0.938729).epsilon(2e-3));

    VideoTensor constant(Tensor::full({1, 192, 192, 3}, 0.5));
    CHECK(ms_ssim(constant, a) == doctest::Approx(0.045591).epsilon(0.05));

    // symmetric in (pred, target)
    CHECK(ms_ssim(a, b) == doctest::Approx(ms_ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("ms_ssim on inverted high-contrast pattern is near zero") {
    VideoTensor check = pattern(192, 192, 'k');
    VideoTensor inv = inverted(check);
    double v = ms_ssim(check, inv);
    CHECK(v < 0.2);
    CHECK(v >= 0.0);

    VideoTensor constant(Tensor::full({1, 192, 192, 3}, 0.5));
    CHECK(ms_ssim(constant, check) < ms_ssim(check, check));
}

TEST_CASE("ms_ssim minimum-size gate") {
    VideoTensor small = make_synthetic_video(1, 64, 128, 5);
    CHECK(!ms_ssim_supported(64, 128));
    CHECK(ms_ssim_supported(176, 176));
    CHECK_THROWS_WITH_AS(ms_ssim(small, small), doctest::Contains("176"), ContractViolation);
}

TEST_CASE("evaluate bundles the report") {
    VideoTensor a = make_synthetic_video(2, 192, 192, 7);
    VideoTensor b = make_synthetic_video(2, 192, 192, 8);
    MetricReport r = evaluate(a, b);
    CHECK(r.per_frame_psnr.size() == 2);
    CHECK(r.per_frame_ms_ssim.size() == 2);
    CHECK(r.ms_ssim > 0.0);
    CHECK(r.ms_ssim <= 1.0);
    MetricReport r2 = evaluate(a, b, /*with_ms_ssim=*/false);
    CHECK(std::isnan(r2.ms_ssim));
}
