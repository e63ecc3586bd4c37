// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "nervkit/common.hpp"

namespace nervkit {

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;
constexpr std::array<double, 5> kMsWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::array<double, kWin> gaussian_window() {
    std::array<double, kWin> w{};
    double s = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        s += w[i];
    }
    for (double& v : w) v /= s;
    return w;
}

/// One channel plane, row-major h x w.
struct Plane {
    std::int64_t h = 0, w = 0;
    std::vector<double> v;
    Plane() = default;
    Plane(std::int64_t hh, std::int64_t ww) : h(hh), w(ww), v(static_cast<std::size_t>(hh * ww), 0.0) {}
    double& at(std::int64_t y, std::int64_t x) { return v[y * w + x]; }
    double at(std::int64_t y, std::int64_t x) const { return v[y * w + x]; }
};

/// Valid-mode separable Gaussian filter; output is (h-10) x (w-10).
Plane gauss_filter(const Plane& p) {
    static const std::array<double, kWin> win = gaussian_window();
    Plane tmp(p.h, p.w - kWin + 1);
    for (std::int64_t y = 0; y < p.h; ++y)
        for (std::int64_t x = 0; x < tmp.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += win[k] * p.at(y, x + k);
            tmp.at(y, x) = acc;
        }
    Plane out(p.h - kWin + 1, tmp.w);
    for (std::int64_t y = 0; y < out.h; ++y)
        for (std::int64_t x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += win[k] * tmp.at(y + k, x);
            out.at(y, x) = acc;
        }
    return out;
}

Plane downsample2(const Plane& p) {
    Plane out(p.h / 2, p.w / 2);
    for (std::int64_t y = 0; y < out.h; ++y)
        for (std::int64_t x = 0; x < out.w; ++x)
            out.at(y, x) =
                0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1));
    return out;
}

Plane extract_channel(const Tensor& frames, std::int64_t t, int c) {
    std::int64_t h = frames.dim(1), w = frames.dim(2);
    Plane p(h, w);
    const double* src = frames.data() + t * h * w * 3;
    for (std::int64_t i = 0; i < h * w; ++i) p.v[i] = src[i * 3 + c];
    return p;
}

/// Mean luminance and contrast-structure terms of SSIM for one channel pair.
struct SsimTerms {
    double ssim;  // mean of full ssim map
    double cs;    // mean of contrast-structure map
};

SsimTerms ssim_terms(const Plane& a, const Plane& b) {
    Plane mu1 = gauss_filter(a), mu2 = gauss_filter(b);
    Plane a2(a.h, a.w), b2(a.h, a.w), ab(a.h, a.w);
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        a2.v[i] = a.v[i] * a.v[i];
        b2.v[i] = b.v[i] * b.v[i];
        ab.v[i] = a.v[i] * b.v[i];
    }
    Plane e_a2 = gauss_filter(a2), e_b2 = gauss_filter(b2), e_ab = gauss_filter(ab);
    double sum_ssim = 0.0, sum_cs = 0.0;
    std::int64_t n = mu1.h * mu1.w;
    for (std::int64_t i = 0; i < n; ++i) {
        double m1 = mu1.v[i], m2 = mu2.v[i];
        double s1 = e_a2.v[i] - m1 * m1;
        double s2 = e_b2.v[i] - m2 * m2;
        double s12 = e_ab.v[i] - m1 * m2;
        double l = (2.0 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1);
        double cs = (2.0 * s12 + kC2) / (s1 + s2 + kC2);
        sum_ssim += l * cs;
        sum_cs += cs;
    }
    return {sum_ssim / n, sum_cs / n};
}

void check_shapes(const VideoTensor& pred, const VideoTensor& target, const char* what) {
    if (!pred.frames.same_shape(target.frames))
        throw ContractViolation(std::string(what) + ": shape mismatch " + pred.frames.shape_str() + " vs " +
                                target.frames.shape_str());
}

double mse_frame(const Tensor& frames_a, const Tensor& frames_b, std::int64_t t) {
    std::int64_t n = frames_a.dim(1) * frames_a.dim(2) * 3;
    const double* a = frames_a.data() + t * n;
    const double* b = frames_b.data() + t * n;
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

double mse_to_psnr(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);  // MAX = 1
}

}  // namespace

std::vector<double> psnr_per_frame(const VideoTensor& pred, const VideoTensor& target) {
    check_shapes(pred, target, "psnr");
    std::int64_t frames = pred.num_frames();
    std::vector<double> out(frames);
    for (std::int64_t t = 0; t < frames; ++t) out[t] = mse_to_psnr(mse_frame(pred.frames, target.frames, t));
    return out;
}

double psnr(const VideoTensor& pred, const VideoTensor& target, PsnrMode mode) {
    check_shapes(pred, target, "psnr");
    std::int64_t frames = pred.num_frames();
    if (mode == PsnrMode::average_mse) {
        double acc = 0.0;
        for (std::int64_t t = 0; t < frames; ++t) acc += mse_frame(pred.frames, target.frames, t);
        return mse_to_psnr(acc / static_cast<double>(frames));
    }
    double acc = 0.0;
    for (double v : psnr_per_frame(pred, target)) acc += v;
    return acc / static_cast<double>(frames);
}

double psnr_for_report(double psnr_db) { return std::min(psnr_db, kPsnrReportCap); }

bool ms_ssim_supported(std::int64_t h, std::int64_t w) {
    // Four halvings with floor must leave room for the 11-tap window.
    for (int s = 0; s < 4; ++s) {
        h /= 2;
        w /= 2;
    }
    return h >= kWin && w >= kWin;
}

namespace {

double ms_ssim_one_frame(const VideoTensor& pred, const VideoTensor& target, std::int64_t t) {
    double result = 0.0;
    for (int c = 0; c < 3; ++c) {
        Plane a = extract_channel(pred.frames, t, c);
        Plane b = extract_channel(target.frames, t, c);
        double channel = 1.0;
        for (std::size_t s = 0; s < kMsWeights.size(); ++s) {
            SsimTerms terms = ssim_terms(a, b);
            bool last = (s + 1 == kMsWeights.size());
            double base = std::max(last ? terms.ssim : terms.cs, 0.0);
            channel *= std::pow(base, kMsWeights[s]);
            if (!last) {
                a = downsample2(a);
                b = downsample2(b);
            }
        }
        result += channel;
    }
    return result / 3.0;
}

}  // namespace

double ssim(const VideoTensor& pred, const VideoTensor& target) {
    check_shapes(pred, target, "ssim");
    if (pred.height() < kWin || pred.width() < kWin)
        throw ContractViolation("ssim: frames must be at least 11x11");
    double acc = 0.0;
    for (std::int64_t t = 0; t < pred.num_frames(); ++t) {
        double frame = 0.0;
        for (int c = 0; c < 3; ++c)
            frame += ssim_terms(extract_channel(pred.frames, t, c), extract_channel(target.frames, t, c)).ssim;
        acc += frame / 3.0;
    }
    return acc / static_cast<double>(pred.num_frames());
}

std::vector<double> ms_ssim_per_frame(const VideoTensor& pred, const VideoTensor& target) {
    check_shapes(pred, target, "ms_ssim");
    if (!ms_ssim_supported(pred.height(), pred.width()))
        throw ContractViolation("ms_ssim: frames of " + std::to_string(pred.height()) + "x" +
                                std::to_string(pred.width()) + " are too small for the 5-scale pyramid; minimum is " +
                                std::to_string(kMsSsimMinSide) + "x" + std::to_string(kMsSsimMinSide));
    std::vector<double> out(pred.num_frames());
    for (std::int64_t t = 0; t < pred.num_frames(); ++t) out[t] = ms_ssim_one_frame(pred, target, t);
    return out;
}

double ms_ssim(const VideoTensor& pred, const VideoTensor& target) {
    std::vector<double> per = ms_ssim_per_frame(pred, target);
    double acc = 0.0;
    for (double v : per) acc += v;
    return acc / static_cast<double>(per.size());
}

MetricReport evaluate(const VideoTensor& pred, const VideoTensor& target, bool with_ms_ssim, PsnrMode mode) {
    MetricReport r;
    r.psnr = psnr(pred, target, mode);
    r.per_frame_psnr = psnr_per_frame(pred, target);
    if (with_ms_ssim) {
        r.per_frame_ms_ssim = ms_ssim_per_frame(pred, target);
        double acc = 0.0;
        for (double v : r.per_frame_ms_ssim) acc += v;
        r.ms_ssim = acc / static_cast<double>(r.per_frame_ms_ssim.size());
    } else {
        r.ms_ssim = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace nervkit
