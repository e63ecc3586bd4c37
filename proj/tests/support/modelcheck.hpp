// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Gradient checking of whole models: d(weighted sum of frame)/d(params).

#pragma once

#include "nervkit/components.hpp"
#include "support/gradcheck.hpp"

namespace nervkit::testing {

/// Central-difference check of every model parameter through a full forward
/// pass at time t, against a fixed random output weighting.
inline GradCheckResult model_grad_check(const Model& model, double t, std::uint64_t seed, double eps = 1e-3,
                                        double tol = 1e-4) {
    Rng rng(seed);
    auto res = model.config().target_resolution;
    Tensor weights({3, res[0], res[1]});
    weights.fill_uniform(rng, -1.0, 1.0);

    std::vector<Tensor> inputs;
    inputs.reserve(model.params().size());
    for (const auto& item : model.params().items()) inputs.push_back(item.value);

    auto build = [&](ad::Tape& tape, const std::vector<ad::Var>& leaves) {
        BoundParams p;
        p.store = &model.params();
        p.vars = leaves;
        ad::Var frame = model.forward(tape, p, t);
        ad::Var w = tape.constant(weights);
        return ad::sum(tape, ad::mul(tape, frame, w));
    };
    return grad_check(inputs, build, eps, tol);
}

}  // namespace nervkit::testing
