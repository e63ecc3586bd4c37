// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/xinc.hpp"

#include <algorithm>
#include <cmath>

#include "nervkit/common.hpp"

namespace nervkit {

ContributionMaps conv_contributions(const Tensor& input_chw, const Tensor& weight, const Tensor& bias) {
    if (input_chw.rank() != 3 || weight.rank() != 4)
        throw ContractViolation("conv_contributions: expects input (C,H,W) and weight (Cout,Cin,k,k)");
    const std::int64_t cin = input_chw.dim(0), h = input_chw.dim(1), w = input_chw.dim(2);
    const std::int64_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    if (weight.dim(1) != cin) throw ContractViolation("conv_contributions: channel mismatch");
    if (bias.numel() != cout) throw ContractViolation("conv_contributions: bias size mismatch");
    const std::int64_t ph = kh / 2, pw = kw / 2;

    ContributionMaps out;
    out.c_in = cin;
    out.c_out = cout;
    out.bias = bias;
    out.maps = Tensor({cin * cout, h, w});
    out.kernel_index.reserve(static_cast<std::size_t>(cin * cout));

    for (std::int64_t co = 0; co < cout; ++co) {
        for (std::int64_t ci = 0; ci < cin; ++ci) {
            out.kernel_index.push_back({ci, co});
            const double* src = input_chw.data() + ci * h * w;
            const double* k = weight.data() + (co * cin + ci) * kh * kw;
            double* dst = out.maps.data() + (co * cin + ci) * h * w;
            for (std::int64_t oy = 0; oy < h; ++oy)
                for (std::int64_t ox = 0; ox < w; ++ox) {
                    double acc = 0.0;
                    for (std::int64_t ky = 0; ky < kh; ++ky) {
                        std::int64_t sy = oy + ky - ph;
                        if (sy < 0 || sy >= h) continue;
                        for (std::int64_t kx = 0; kx < kw; ++kx) {
                            std::int64_t sx = ox + kx - pw;
                            if (sx < 0 || sx >= w) continue;
                            acc += src[sy * w + sx] * k[ky * kw + kx];
                        }
                    }
                    dst[oy * w + ox] = acc;
                }
        }
    }
    return out;
}

ContributionMaps head_contributions(const Model& model, double t) {
    Model::HeadTap tap = model.head_tap(t);
    const ParamStore& params = model.params();
    ContributionMaps maps =
        conv_contributions(tap.head_input, params.get("head.weight"), params.get("head.bias"));
    maps.timestep = t;
    return maps;
}

ContributionMaps hypo_head_contributions(const HyperNet& net, const std::vector<Tensor>& tokens, bool masked,
                                         int frame_idx) {
    HyperNet::HeadTap tap = net.head_tap(tokens, masked, frame_idx);
    ContributionMaps maps = conv_contributions(tap.input, tap.weight, tap.bias);
    maps.timestep = net.config().hypo.clip_frames > 1
                        ? static_cast<double>(frame_idx) / (net.config().hypo.clip_frames - 1)
                        : 0.0;
    maps.has_shuffle = true;
    maps.stride = tap.upscale;
    return maps;
}

Tensor shuffle_contributions(const ContributionMaps& maps, std::array<int, 2> stride) {
    const int sh = stride[0], sw = stride[1];
    if (sh < 1 || sw < 1) throw ContractViolation("shuffle_contributions: strides must be >= 1");
    const std::int64_t n = maps.maps.dim(0), h = maps.maps.dim(1), w = maps.maps.dim(2);
    if (maps.c_out % (static_cast<std::int64_t>(sh) * sw) != 0)
        throw ContractViolation("shuffle_contributions: c_out not divisible by the stride group");
    Tensor out({n, h * sh, w * sw});
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t co = maps.kernel_index[k][1];
        // Shuffle lattice position owned by this conv output channel.
        std::int64_t rem = co % (sh * sw);
        std::int64_t dy = rem / sw, dx = rem % sw;
        const double* src = maps.maps.data() + k * h * w;
        double* dst = out.data() + k * (h * sh) * (w * sw);
        for (std::int64_t y = 0; y < h; ++y)
            for (std::int64_t x = 0; x < w; ++x) dst[(y * sh + dy) * (w * sw) + (x * sw + dx)] = src[y * w + x];
    }
    return out;
}

std::vector<std::int64_t> sort_by_magnitude(const Tensor& maps) {
    if (maps.rank() != 3) throw ContractViolation("sort_by_magnitude: expects (N,H,W)");
    const std::int64_t n = maps.dim(0), hw = maps.dim(1) * maps.dim(2);
    std::vector<double> mag(n, 0.0);
    for (std::int64_t k = 0; k < n; ++k) {
        const double* src = maps.data() + k * hw;
        double acc = 0.0;
        for (std::int64_t i = 0; i < hw; ++i) acc += std::abs(src[i]);
        mag[k] = acc;
    }
    std::vector<std::int64_t> order(n);
    for (std::int64_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) { return mag[a] > mag[b]; });
    return order;
}

namespace {
Tensor total_contribution(const ContributionMaps& m) {
    const std::int64_t h = m.maps.dim(1), w = m.maps.dim(2);
    Tensor total({h, w});
    for (std::int64_t k = 0; k < m.maps.dim(0); ++k) {
        const double* src = m.maps.data() + k * h * w;
        for (std::int64_t i = 0; i < h * w; ++i) total[i] += src[i];
    }
    return total;
}
}  // namespace

Tensor motion_fluctuation(const ContributionMaps& at_t, const ContributionMaps& at_next) {
    if (!at_t.maps.same_shape(at_next.maps))
        throw ContractViolation("motion_fluctuation: contribution resolutions differ: " + at_t.maps.shape_str() +
                                " vs " + at_next.maps.shape_str());
    Tensor a = total_contribution(at_t);
    Tensor b = total_contribution(at_next);
    Tensor out(a.shape());
    for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = std::abs(b[i] - a[i]);
    return out;
}

Tensor summed_view(const ContributionMaps& m, std::optional<FinalActivation> activation) {
    const std::int64_t h = m.maps.dim(1), w = m.maps.dim(2);
    Tensor out({m.c_out, h, w});
    for (std::int64_t k = 0; k < m.maps.dim(0); ++k) {
        std::int64_t co = m.kernel_index[k][1];
        const double* src = m.maps.data() + k * h * w;
        double* dst = out.data() + co * h * w;
        for (std::int64_t i = 0; i < h * w; ++i) dst[i] += src[i];
    }
    for (std::int64_t co = 0; co < m.c_out; ++co) {
        double* dst = out.data() + co * h * w;
        for (std::int64_t i = 0; i < h * w; ++i) dst[i] += m.bias[co];
    }
    if (activation) {
        ad::Tape tape;
        out = tape.val(apply_final_activation(tape, tape.constant(out), *activation));
    }
    return out;
}

KernelTotals kernel_totals(const Tensor& maps) {
    KernelTotals t;
    const std::int64_t n = maps.dim(0), hw = maps.dim(1) * maps.dim(2);
    t.sum.resize(n);
    t.abs_sum.resize(n);
    for (std::int64_t k = 0; k < n; ++k) {
        const double* src = maps.data() + k * hw;
        double s = 0.0, a = 0.0;
        for (std::int64_t i = 0; i < hw; ++i) {
            s += src[i];
            a += std::abs(src[i]);
        }
        t.sum[k] = s;
        t.abs_sum[k] = a;
    }
    return t;
}

}  // namespace nervkit
