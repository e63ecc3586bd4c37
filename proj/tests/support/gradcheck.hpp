// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Central-finite-difference gradient checking used across the test suites.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nervkit/autodiff.hpp"
#include "nervkit/tensor.hpp"

namespace nervkit::testing {

struct GradCheckResult {
    bool ok = true;
    double worst_rel = 0.0;
    std::string detail;
};

/// Checks d(scalar)/d(inputs) against central finite differences (five-point
/// stencil at perturbation eps, so truncation error is O(eps^4) and the 1e-4
/// relative tolerance is meaningful). `build` must construct the full graph
/// from the leaf values and return the scalar root; it is re-run for every
/// perturbed evaluation, so keep instances small. Relative error uses
/// max(|analytic|, |numeric|, 1) as the denominator.
inline GradCheckResult grad_check(const std::vector<Tensor>& inputs,
                                  const std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>& build,
                                  double eps = 1e-3, double tol = 1e-4) {
    GradCheckResult res;

    auto eval = [&](const std::vector<Tensor>& vals) {
        ad::Tape tape;
        std::vector<ad::Var> leaves;
        leaves.reserve(vals.size());
        for (const Tensor& v : vals) leaves.push_back(tape.leaf(v, false));
        ad::Var root = build(tape, leaves);
        return tape.val(root)[0];
    };

    // Analytic pass.
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const Tensor& v : inputs) leaves.push_back(tape.leaf(v, true));
    ad::Var root = build(tape, leaves);
    tape.backward(root);

    std::vector<Tensor> work = inputs;
    for (std::size_t li = 0; li < inputs.size(); ++li) {
        const Tensor& analytic = tape.grad(leaves[li]);
        for (std::int64_t i = 0; i < inputs[li].numel(); ++i) {
            double keep = work[li][i];
            work[li][i] = keep + 2.0 * eps;
            double fp2 = eval(work);
            work[li][i] = keep + eps;
            double fp1 = eval(work);
            work[li][i] = keep - eps;
            double fm1 = eval(work);
            work[li][i] = keep - 2.0 * eps;
            double fm2 = eval(work);
            work[li][i] = keep;
            double numeric = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * eps);
            double a = analytic[i];
            double denom = std::max({std::abs(a), std::abs(numeric), 1.0});
            double rel = std::abs(a - numeric) / denom;
            if (rel > res.worst_rel) {
                res.worst_rel = rel;
                res.detail = "input " + std::to_string(li) + " elem " + std::to_string(i) + ": analytic " +
                             std::to_string(a) + " vs numeric " + std::to_string(numeric);
            }
        }
    }
    res.ok = res.worst_rel <= tol;
    return res;
}

}  // namespace nervkit::testing
