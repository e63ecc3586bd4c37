// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/hypernerv.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nervkit/common.hpp"
#include "nervkit/trainer.hpp"

namespace nervkit {

std::array<std::int64_t, 2> HypoLayout::base_resolution() const {
    std::int64_t sh = 1, sw = 1;
    for (const HypoLayerSpec& l : layers) {
        sh *= l.upscale[0];
        sw *= l.upscale[1];
    }
    if (sh == 0 || sw == 0 || clip_resolution[0] % sh != 0 || clip_resolution[1] % sw != 0)
        throw ConfigError("hypo layout: upscale product does not divide the clip resolution");
    return {clip_resolution[0] / sh, clip_resolution[1] / sw};
}

std::int64_t HypoLayout::unique_params(bool masked) const {
    std::int64_t total = 0;
    for (const HypoLayerSpec& l : layers) total += (masked ? l.token_count_min : l.token_count_max) * l.token_dim;
    return total;
}

void HypoLayout::validate() const {
    if (layers.empty()) throw ConfigError("hypo layout: needs at least one layer");
    if (fc_dim < 1 || pos_dim < 1) throw ConfigError("hypo layout: fc_dim and pos_dim must be positive");
    if (pos_dim % 2 != 0) throw ConfigError("hypo layout: pos_dim must be even (sinusoidal time conditioning)");
    if (clip_frames < 1) throw ConfigError("hypo layout: clip_frames must be >= 1");
    base_resolution();  // divisibility
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const HypoLayerSpec& l = layers[i];
        if (l.kernel_size < 1 || l.kernel_size % 2 == 0)
            throw ConfigError("hypo layout: kernel sizes must be odd");
        if (l.upscale[0] < 1 || l.upscale[1] < 1) throw ConfigError("hypo layout: upscale must be >= 1");
        if (l.token_count_max < 0 || l.token_count_min < 0 || l.token_dim < 0)
            throw ConfigError("hypo layout: token settings must be nonnegative");
        if (l.token_count_min > l.token_count_max)
            throw ConfigError("hypo layout: token_count_min must not exceed token_count_max");
        if (l.token_count_max > 0) {
            if (l.token_dim < 1) throw ConfigError("hypo layout: modulated layers need a token_dim");
            if (l.token_count_min != l.token_count_max && 2 * l.token_count_min != l.token_count_max)
                throw ConfigError("hypo layout: masking keeps exactly half the tokens (min = max/2)");
            std::int64_t wc = layer_weight_count(i);
            if (wc % (l.token_count_max * l.token_dim) != 0)
                throw ConfigError("hypo layout: layer " + std::to_string(i) + " weight count " + std::to_string(wc) +
                                  " is not a multiple of token block " +
                                  std::to_string(l.token_count_max * l.token_dim));
            if (l.token_count_min > 0 && wc % (l.token_count_min * l.token_dim) != 0)
                throw ConfigError("hypo layout: layer " + std::to_string(i) +
                                  " kept-token block does not tile the weights");
        }
    }
}

std::int64_t HyperConfig::video_tokens_per_clip() const {
    return static_cast<std::int64_t>(hypo.clip_frames) * (hypo.clip_resolution[0] / patch_size) *
           (hypo.clip_resolution[1] / patch_size);
}

void HyperConfig::validate() const {
    hypo.validate();
    if (patch_size < 1) throw ConfigError("hyper config: patch_size must be positive");
    if (hypo.clip_resolution[0] % patch_size != 0 || hypo.clip_resolution[1] % patch_size != 0)
        throw ConfigError("hyper config: frame dims " + std::to_string(hypo.clip_resolution[0]) + "x" +
                          std::to_string(hypo.clip_resolution[1]) + " are not divisible by patch size " +
                          std::to_string(patch_size));
    if (backbone.dim < 1 || backbone.dim % backbone.heads != 0)
        throw ConfigError("hyper config: backbone dim must be a positive multiple of heads");
    if (masking) {
        if (masking_ratio <= 0.0 || masking_ratio >= 1.0)
            throw ConfigError("hyper config: masking_ratio must be in (0,1)");
        bool any = false;
        for (const HypoLayerSpec& l : hypo.layers)
            any = any || (l.token_count_max > 0 && l.token_count_min < l.token_count_max);
        if (!any) throw ConfigError("hyper config: masking enabled but no layer has min < max tokens");
    }
}

std::vector<Tensor> apply_mask(const std::vector<Tensor>& tokens, const HypoLayout& layout, bool mask_on) {
    std::vector<Tensor> out = tokens;
    if (!mask_on) return out;
    std::size_t ti = 0;
    for (const HypoLayerSpec& l : layout.layers) {
        if (l.token_count_max == 0) continue;
        Tensor& tok = out[ti++];
        for (std::int64_t r = l.token_count_min; r < l.token_count_max; ++r)
            for (std::int64_t c = 0; c < l.token_dim; ++c) tok.at2(r, c) = 0.0;
    }
    return out;
}

HyperNet::HyperNet(HyperConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    Rng rng(seed);
    const HypoLayout& hy = config_.hypo;

    const std::int64_t patch_dim = static_cast<std::int64_t>(config_.patch_size) * config_.patch_size * 3;
    params_.add_linear("tok.proj", config_.backbone.dim, patch_dim, rng);
    params_.add("tok.posemb", {config_.video_tokens_per_clip(), config_.backbone.dim}).fill_normal(rng, 0.0, 0.02);

    std::int64_t total_slots = 0;
    for (std::size_t i = 0; i < hy.layers.size(); ++i)
        if (hy.layers[i].token_count_max > 0) {
            modulated_.push_back(i);
            total_slots += hy.layers[i].token_count_max;
        }
    if (total_slots > 0) params_.add("slots", {total_slots, config_.backbone.dim}).fill_normal(rng, 0.0, 0.02);

    add_transformer_params(params_, "backbone", config_.backbone, rng);

    for (std::size_t i : modulated_)
        params_.add_linear("layer" + std::to_string(i) + ".tokfc", hy.layers[i].token_dim, config_.backbone.dim, rng);

    auto base = hy.base_resolution();
    params_.add("hypo.posemb", {hy.pos_dim, base[0], base[1]}).fill_normal(rng, 0.0, 1e-2);
    for (std::size_t i = 0; i < hy.layers.size(); ++i) {
        const HypoLayerSpec& l = hy.layers[i];
        std::string p = "hypo.layer" + std::to_string(i);
        params_.add_conv(p, hy.conv_channels(i), hy.in_channels(i), l.kernel_size, l.kernel_size, rng);
        if (l.token_count_max > 0) params_.add(p + ".gain", {hy.conv_channels(i)}).fill(1.0);
    }
}

Tensor HyperNet::tokenize_clip(const VideoTensor& clip) const {
    const HypoLayout& hy = config_.hypo;
    if (clip.num_frames() != hy.clip_frames || clip.height() != hy.clip_resolution[0] ||
        clip.width() != hy.clip_resolution[1])
        throw ContractViolation("tokenize_clip: clip shape " + clip.frames.shape_str() + " does not match layout");
    const std::int64_t p = config_.patch_size;
    const std::int64_t py = clip.height() / p, px = clip.width() / p;
    Tensor out({clip.num_frames() * py * px, p * p * 3});
    std::int64_t row = 0;
    for (std::int64_t f = 0; f < clip.num_frames(); ++f) {
        const double* frame = clip.frames.data() + f * clip.height() * clip.width() * 3;
        for (std::int64_t by = 0; by < py; ++by)
            for (std::int64_t bx = 0; bx < px; ++bx, ++row) {
                double* dst = out.data() + row * p * p * 3;
                for (std::int64_t y = 0; y < p; ++y)
                    for (std::int64_t x = 0; x < p; ++x) {
                        const double* pix = frame + ((by * p + y) * clip.width() + bx * p + x) * 3;
                        double* o = dst + (y * p + x) * 3;
                        o[0] = pix[0];
                        o[1] = pix[1];
                        o[2] = pix[2];
                    }
            }
    }
    return out;
}

std::vector<ad::Var> HyperNet::predict_tokens(ad::Tape& tape, const BoundParams& p, const Tensor& video_tokens) const {
    const HypoLayout& hy = config_.hypo;
    ad::Var vt = tape.constant(video_tokens);
    ad::Var embedded = ad::linear(tape, vt, p["tok.proj.weight"], p["tok.proj.bias"]);
    embedded = ad::add(tape, embedded, p["tok.posemb"]);
    ad::Var x = modulated_.empty() ? embedded : ad::concat_rows(tape, {embedded, p["slots"]});
    x = transformer_forward(tape, config_.backbone, p, "backbone", x);

    std::vector<ad::Var> out;
    std::int64_t slot0 = config_.video_tokens_per_clip();
    for (std::size_t i : modulated_) {
        std::int64_t count = hy.layers[i].token_count_max;
        ad::Var rows = ad::slice_rows(tape, x, slot0, slot0 + count);
        slot0 += count;
        std::string fc = "layer" + std::to_string(i) + ".tokfc";
        out.push_back(ad::linear(tape, rows, p[fc + ".weight"], p[fc + ".bias"]));
    }
    return out;
}

ad::Var HyperNet::layer_weight(ad::Tape& tape, const BoundParams& p, std::size_t layer, ad::Var tok,
                               bool masked) const {
    const HypoLayout& hy = config_.hypo;
    const HypoLayerSpec& l = hy.layers[layer];
    std::string name = "hypo.layer" + std::to_string(layer);
    if (l.token_count_max == 0) return p[name + ".weight"];

    std::int64_t kept = masked ? l.token_count_min : l.token_count_max;
    if (kept == 0) return p[name + ".weight"];
    if (tape.val(tok).dim(0) < kept)
        throw ContractViolation("hypo layer " + std::to_string(layer) + " expects " + std::to_string(kept) +
                                " tokens, got " + std::to_string(tape.val(tok).dim(0)));
    if (tape.val(tok).dim(0) != kept) tok = ad::slice_rows(tape, tok, 0, kept);

    std::int64_t wc = hy.layer_weight_count(layer);
    std::int64_t cout = hy.conv_channels(layer);
    std::int64_t row = wc / cout;  // cin * kh * kw
    ad::Var flat = ad::tile_rows_to(tape, tok, wc);
    ad::Var mod2d =
        ad::mul(tape, ad::reshape(tape, flat, {cout, row}), ad::reshape(tape, p[name + ".weight"], {cout, row}));
    ad::Var normed = ad::row_l2_normalize(tape, mod2d, 1e-6);
    ad::Var gained = ad::mul_channel(tape, ad::reshape(tape, normed, {cout, row, 1}), p[name + ".gain"]);
    return ad::reshape(tape, gained, {cout, hy.in_channels(layer), l.kernel_size, l.kernel_size});
}

namespace {
ad::Var hypo_input_map(ad::Tape& tape, const BoundParams& p, const HypoLayout& hy, int frame_idx) {
    if (frame_idx < 0 || frame_idx >= hy.clip_frames)
        throw ContractViolation("hypo forward: frame index out of range");
    double t = hy.clip_frames > 1 ? static_cast<double>(frame_idx) / static_cast<double>(hy.clip_frames - 1) : 0.0;
    Tensor enc = sinusoidal_encode(t, 1.25, static_cast<int>(hy.pos_dim / 2));
    return ad::add_channel(tape, p["hypo.posemb"], tape.constant(enc));
}
}  // namespace

ad::Var HyperNet::hypo_forward(ad::Tape& tape, const BoundParams& p, const std::vector<ad::Var>& tokens, bool masked,
                               int frame_idx) const {
    const HypoLayout& hy = config_.hypo;
    ad::Var x = hypo_input_map(tape, p, hy, frame_idx);
    std::size_t ti = 0;
    for (std::size_t i = 0; i < hy.layers.size(); ++i) {
        const HypoLayerSpec& l = hy.layers[i];
        ad::Var tok{};
        if (l.token_count_max > 0) tok = tokens[ti++];
        ad::Var w = layer_weight(tape, p, i, tok, masked);
        int pad = l.kernel_size / 2;
        x = ad::conv2d(tape, x, w, p["hypo.layer" + std::to_string(i) + ".bias"], 1, pad, pad);
        x = ad::pixel_shuffle(tape, x, l.upscale[0], l.upscale[1]);
        if (i + 1 < hy.layers.size())
            x = apply_activation(tape, x, hy.activation);
        else
            x = ad::sigmoid(tape, x);
    }
    return x;
}

HyperNet::HeadTap HyperNet::head_tap(const std::vector<Tensor>& tokens, bool masked, int frame_idx) const {
    const HypoLayout& hy = config_.hypo;
    ad::Tape tape;
    BoundParams p = bind(tape, false);
    std::vector<ad::Var> tok_vars;
    tok_vars.reserve(tokens.size());
    for (const Tensor& t : tokens) tok_vars.push_back(tape.constant(t));

    ad::Var x = hypo_input_map(tape, p, hy, frame_idx);
    std::size_t ti = 0;
    const std::size_t last = hy.layers.size() - 1;
    for (std::size_t i = 0; i < last; ++i) {
        const HypoLayerSpec& l = hy.layers[i];
        ad::Var tok{};
        if (l.token_count_max > 0) tok = tok_vars[ti++];
        ad::Var w = layer_weight(tape, p, i, tok, masked);
        int pad = l.kernel_size / 2;
        x = ad::conv2d(tape, x, w, p["hypo.layer" + std::to_string(i) + ".bias"], 1, pad, pad);
        x = ad::pixel_shuffle(tape, x, l.upscale[0], l.upscale[1]);
        x = apply_activation(tape, x, hy.activation);
    }
    ad::Var htok{};
    if (hy.layers[last].token_count_max > 0) htok = tok_vars[ti];
    ad::Var w = layer_weight(tape, p, last, htok, masked);
    HeadTap tap;
    tap.input = tape.val(x);
    tap.weight = tape.val(w);
    tap.bias = params_.get("hypo.layer" + std::to_string(last) + ".bias");
    tap.upscale = hy.layers[last].upscale;
    return tap;
}

std::vector<Tensor> HyperNet::predict_tokens_value(const VideoTensor& clip) const {
    ad::Tape tape;
    BoundParams p = bind(tape, false);
    std::vector<ad::Var> vars = predict_tokens(tape, p, tokenize_clip(clip));
    std::vector<Tensor> out;
    out.reserve(vars.size());
    for (ad::Var v : vars) out.push_back(tape.val(v));
    return out;
}

VideoTensor HyperNet::reconstruct(const std::vector<Tensor>& tokens, bool masked, const std::string& name) const {
    const HypoLayout& hy = config_.hypo;
    VideoTensor out;
    out.frames = Tensor({hy.clip_frames, hy.clip_resolution[0], hy.clip_resolution[1], 3});
    out.name = name;
    ad::Tape tape;
    for (int f = 0; f < hy.clip_frames; ++f) {
        tape.clear();
        BoundParams p = bind(tape, false);
        std::vector<ad::Var> tok_vars;
        tok_vars.reserve(tokens.size());
        for (const Tensor& t : tokens) tok_vars.push_back(tape.constant(t));
        ad::Var frame = hypo_forward(tape, p, tok_vars, masked, f);
        out.set_frame_chw(f, tape.val(frame), /*clamp=*/true);
    }
    return out;
}

HyperTrainResult hyper_train(HyperNet& net, const std::vector<VideoTensor>& clips, const HyperTrainOptions& opts) {
    if (clips.empty()) throw ConfigError("hyper_train: no clips");
    const HypoLayout& hy = net.config().hypo;
    for (const VideoTensor& c : clips)
        if (c.num_frames() != hy.clip_frames || c.height() != hy.clip_resolution[0] ||
            c.width() != hy.clip_resolution[1])
            throw ConfigError("hyper_train: clip '" + c.name + "' does not match the layout clip shape");

    // Tokenized inputs and per-frame targets are fixed; cache them.
    std::vector<Tensor> tokenized;
    std::vector<std::vector<Tensor>> targets(clips.size());
    tokenized.reserve(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        tokenized.push_back(net.tokenize_clip(clips[i]));
        for (std::int64_t f = 0; f < clips[i].num_frames(); ++f) targets[i].push_back(clips[i].frame_chw(f));
    }

    AdamOptimizer adam(0.9, 0.999, 1e-8);
    Rng rng(opts.seed);
    ad::Tape tape;
    HyperTrainResult result;
    const bool masking = net.config().masking;
    const double ratio = net.config().masking_ratio;

    for (std::int64_t step = 0; step < opts.steps; ++step) {
        tape.clear();
        BoundParams p = net.bind(tape, true);
        ad::Var total{};
        int batch = std::min<int>(opts.batch_clips, static_cast<int>(clips.size()));
        for (int b = 0; b < batch; ++b) {
            std::size_t ci = static_cast<std::size_t>(rng.below(clips.size()));
            bool masked = masking && rng.uniform() < ratio;
            std::vector<ad::Var> tokens = net.predict_tokens(tape, p, tokenized[ci]);
            ad::Var clip_loss{};
            for (int f = 0; f < hy.clip_frames; ++f) {
                ad::Var pred = net.hypo_forward(tape, p, tokens, masked, f);
                ad::Var diff = ad::sub(tape, pred, tape.constant(targets[ci][f]));
                ad::Var l = ad::mean(tape, ad::square(tape, diff));
                clip_loss = clip_loss.valid() ? ad::add(tape, clip_loss, l) : l;
            }
            clip_loss = ad::mul_scalar(tape, clip_loss, 1.0 / hy.clip_frames);
            total = total.valid() ? ad::add(tape, total, clip_loss) : clip_loss;
        }
        total = ad::mul_scalar(tape, total, 1.0 / batch);
        double loss = tape.val(total)[0];
        if (!std::isfinite(loss))
            throw NumericError("hyper_train: non-finite loss at step " + std::to_string(step));
        tape.backward(total);
        std::vector<Tensor> grads;
        grads.reserve(p.vars.size());
        for (ad::Var v : p.vars) grads.push_back(tape.grad(v));
        adam.step(net.params(), grads, opts.lr);
        result.loss_history.push_back(loss);
        if (opts.on_step) opts.on_step(step, loss);
    }
    result.final_loss = result.loss_history.empty() ? 0.0 : result.loss_history.back();
    return result;
}

// ---------------------------------------------------------------------------
// clip bitstream

namespace {
constexpr char kClipMagic[4] = {'N', 'R', 'V', 'H'};
constexpr std::uint32_t kClipVersion = 1;
}  // namespace

std::vector<std::uint8_t> ClipBitstream::serialize() const {
    std::vector<std::uint8_t> out(kClipMagic, kClipMagic + 4);
    auto u8 = [&](std::uint8_t v) { out.push_back(v); };
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    auto u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    u32(kClipVersion);
    u32(static_cast<std::uint32_t>(layout_hash.size()));
    out.insert(out.end(), layout_hash.begin(), layout_hash.end());
    u8(masked ? 1 : 0);
    u8(static_cast<std::uint8_t>(bits));
    u32(static_cast<std::uint32_t>(layers.size()));
    for (const LayerTokens& l : layers) {
        u64(static_cast<std::uint64_t>(l.count));
        u64(static_cast<std::uint64_t>(l.dim));
        std::uint64_t sbits;
        std::memcpy(&sbits, &l.scale, 8);
        u64(sbits);
        u32(static_cast<std::uint32_t>(l.table.freq.size()));
        for (std::uint16_t f : l.table.freq) {
            out.push_back(static_cast<std::uint8_t>(f & 0xFF));
            out.push_back(static_cast<std::uint8_t>(f >> 8));
        }
        u64(l.symbol_count);
        u64(l.payload.size());
        out.insert(out.end(), l.payload.begin(), l.payload.end());
    }
    return out;
}

ClipBitstream ClipBitstream::deserialize(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (pos + n > bytes.size()) throw DataError("clip bitstream: truncated");
    };
    auto u8 = [&]() {
        need(1);
        return bytes[pos++];
    };
    auto u32 = [&]() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    };
    auto u64 = [&]() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    };
    need(4);
    if (std::memcmp(bytes.data(), kClipMagic, 4) != 0) throw DataError("clip bitstream: bad magic");
    pos = 4;
    if (u32() != kClipVersion) throw DataError("clip bitstream: unsupported version");
    ClipBitstream s;
    std::uint32_t hlen = u32();
    need(hlen);
    s.layout_hash.assign(bytes.begin() + pos, bytes.begin() + pos + hlen);
    pos += hlen;
    s.masked = u8() != 0;
    s.bits = u8();
    std::uint32_t count = u32();
    s.layers.resize(count);
    for (LayerTokens& l : s.layers) {
        l.count = static_cast<std::int64_t>(u64());
        l.dim = static_cast<std::int64_t>(u64());
        std::uint64_t sbits = u64();
        std::memcpy(&l.scale, &sbits, 8);
        std::uint32_t slots = u32();
        l.table.bits = s.bits;
        l.table.freq.resize(slots);
        std::uint32_t total = 0;
        for (std::uint32_t i = 0; i < slots; ++i) {
            need(2);
            l.table.freq[i] = static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
            pos += 2;
            total += l.table.freq[i];
        }
        l.table.total = total;
        l.symbol_count = u64();
        std::uint64_t plen = u64();
        need(plen);
        l.payload.assign(bytes.begin() + pos, bytes.begin() + pos + plen);
        pos += plen;
    }
    return s;
}

ClipBitstream encode_clip(const HyperNet& net, const VideoTensor& clip, bool mask_on, int bits,
                          const std::string& layout_hash) {
    if (mask_on && !net.config().masking) {
        // Quality unguaranteed; proceed per the contract.
        std::fputs("warning: masked encode requested on a network trained without masking\n", stderr);
    }
    std::vector<Tensor> tokens = net.predict_tokens_value(clip);
    ClipBitstream s;
    s.layout_hash = layout_hash;
    s.masked = mask_on;
    s.bits = bits;
    const HypoLayout& hy = net.config().hypo;
    std::size_t ti = 0;
    for (std::size_t i : net.modulated_layers()) {
        const HypoLayerSpec& l = hy.layers[i];
        std::int64_t kept = mask_on ? l.token_count_min : l.token_count_max;
        Tensor block({kept, l.token_dim});
        for (std::int64_t r = 0; r < kept; ++r)
            for (std::int64_t c = 0; c < l.token_dim; ++c) block.at2(r, c) = tokens[ti].at2(r, c);
        ++ti;
        QuantizedTensor q = quantize(block, bits);
        ClipBitstream::LayerTokens rec;
        rec.count = kept;
        rec.dim = l.token_dim;
        rec.scale = q.scale;
        rec.table = FrequencyTable::build(q.symbols, bits);
        rec.symbol_count = q.symbols.size();
        rec.payload = entropy_encode(q.symbols, rec.table);
        s.layers.push_back(std::move(rec));
    }
    return s;
}

std::vector<Tensor> decode_tokens(const ClipBitstream& stream) {
    std::vector<Tensor> tokens;
    tokens.reserve(stream.layers.size());
    for (const ClipBitstream::LayerTokens& l : stream.layers) {
        QuantizedTensor q;
        q.bits = stream.bits;
        q.scale = l.scale;
        q.shape = {l.count, l.dim};
        q.symbols = entropy_decode(l.payload, l.table, l.symbol_count);
        tokens.push_back(dequantize(q));
    }
    return tokens;
}

VideoTensor decode_clip(const HyperNet& net, const ClipBitstream& stream, const std::string& layout_hash) {
    if (stream.layout_hash != layout_hash)
        throw DataError("clip bitstream layout hash " + stream.layout_hash + " does not match network " +
                        layout_hash);
    std::vector<Tensor> tokens = decode_tokens(stream);
    return net.reconstruct(tokens, stream.masked, "decoded");
}

}  // namespace nervkit
