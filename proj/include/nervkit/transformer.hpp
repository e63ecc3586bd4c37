// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nervkit/params.hpp"

namespace nervkit {

/// Pre-norm transformer encoder stack shared by the E-NeRV-style stem and the
/// hyper-network backbone.
struct TransformerConfig {
    std::int64_t dim = 64;
    std::int64_t ff_dim = 128;
    int heads = 4;
    int blocks = 1;
};

void add_transformer_params(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg, Rng& rng);

/// x is (tokens, dim); returns (tokens, dim). A final layer norm is applied
/// after the last block.
ad::Var transformer_forward(ad::Tape& t, const TransformerConfig& cfg, const BoundParams& p,
                            const std::string& prefix, ad::Var x);

}  // namespace nervkit
