// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/transformer.hpp"

#include <cmath>

#include "nervkit/common.hpp"

namespace nervkit {

void add_transformer_params(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg, Rng& rng) {
    if (cfg.dim % cfg.heads != 0) throw ConfigError("transformer: dim must be divisible by heads");
    for (int b = 0; b < cfg.blocks; ++b) {
        std::string p = prefix + ".block" + std::to_string(b);
        store.add_norm(p + ".ln1", cfg.dim);
        store.add_linear(p + ".wq", cfg.dim, cfg.dim, rng);
        store.add_linear(p + ".wk", cfg.dim, cfg.dim, rng);
        store.add_linear(p + ".wv", cfg.dim, cfg.dim, rng);
        store.add_linear(p + ".wo", cfg.dim, cfg.dim, rng);
        store.add_norm(p + ".ln2", cfg.dim);
        store.add_linear(p + ".ff1", cfg.ff_dim, cfg.dim, rng);
        store.add_linear(p + ".ff2", cfg.dim, cfg.ff_dim, rng);
    }
    store.add_norm(prefix + ".ln_out", cfg.dim);
}

namespace {

ad::Var attention(ad::Tape& t, const TransformerConfig& cfg, const BoundParams& p, const std::string& bp,
                  ad::Var x) {
    ad::Var q = ad::linear(t, x, p[bp + ".wq.weight"], p[bp + ".wq.bias"]);
    ad::Var k = ad::linear(t, x, p[bp + ".wk.weight"], p[bp + ".wk.bias"]);
    ad::Var v = ad::linear(t, x, p[bp + ".wv.weight"], p[bp + ".wv.bias"]);
    std::int64_t dh = cfg.dim / cfg.heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<ad::Var> heads;
    heads.reserve(cfg.heads);
    for (int h = 0; h < cfg.heads; ++h) {
        ad::Var qh = ad::slice_cols(t, q, h * dh, (h + 1) * dh);
        ad::Var kh = ad::slice_cols(t, k, h * dh, (h + 1) * dh);
        ad::Var vh = ad::slice_cols(t, v, h * dh, (h + 1) * dh);
        ad::Var scores = ad::mul_scalar(t, ad::matmul_nt(t, qh, kh), scale);
        ad::Var attn = ad::softmax_rows(t, scores);
        heads.push_back(ad::matmul(t, attn, vh));
    }
    ad::Var cat = cfg.heads == 1 ? heads[0] : ad::concat_cols(t, heads);
    return ad::linear(t, cat, p[bp + ".wo.weight"], p[bp + ".wo.bias"]);
}

}  // namespace

ad::Var transformer_forward(ad::Tape& t, const TransformerConfig& cfg, const BoundParams& p,
                            const std::string& prefix, ad::Var x) {
    for (int b = 0; b < cfg.blocks; ++b) {
        std::string bp = prefix + ".block" + std::to_string(b);
        ad::Var n1 = ad::layer_norm_rows(t, x, p[bp + ".ln1.gamma"], p[bp + ".ln1.beta"]);
        x = ad::add(t, x, attention(t, cfg, p, bp, n1));
        ad::Var n2 = ad::layer_norm_rows(t, x, p[bp + ".ln2.gamma"], p[bp + ".ln2.beta"]);
        ad::Var ff = ad::linear(t, n2, p[bp + ".ff1.weight"], p[bp + ".ff1.bias"]);
        ff = ad::gelu(t, ff);
        ff = ad::linear(t, ff, p[bp + ".ff2.weight"], p[bp + ".ff2.bias"]);
        x = ad::add(t, x, ff);
    }
    return ad::layer_norm_rows(t, x, p[prefix + ".ln_out.gamma"], p[prefix + ".ln_out.beta"]);
}

}  // namespace nervkit
