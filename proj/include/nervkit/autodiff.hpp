// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nervkit/tensor.hpp"

namespace nervkit::ad {

/// Handle into a Tape. Default-constructed handles are invalid and stand for
/// "no tensor" (e.g. a conv with no bias).
struct Var {
    std::int32_t id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. A fresh graph is recorded per forward pass; backward()
/// walks the nodes in reverse creation order. Single-threaded by design so
/// gradient accumulation order is fixed and results are reproducible.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Record an input tensor. requires_grad marks trainable leaves.
    Var leaf(Tensor value, bool requires_grad);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& val(Var v) const { return nodes_[v.id].value; }
    /// Gradient buffer (allocated on demand, zero-initialized).
    Tensor& grad(Var v);
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    /// Seed d(root)=1 and propagate. root must be a scalar (numel 1).
    void backward(Var root);

    /// Drop all nodes; handles become invalid.
    void clear();

    std::size_t size() const { return nodes_.size(); }

    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        bool grad_alloc = false;
        std::function<void(Tape&)> backprop;  // empty for leaves/constants
    };
    /// For op implementations only: attach the backward closure.
    Node& node_mut(Var v) { return nodes_[v.id]; }

private:
    std::vector<Node> nodes_;

    friend Var make_node(Tape&, Tensor, bool, std::function<void(Tape&)>);
};

// ---- elementwise / scalar ----
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale_add(Tape& t, Var a, Var b, double alpha, double beta);  // alpha*a + beta*b
Var add_scalar(Tape& t, Var a, double s);
Var mul_scalar(Tape& t, Var a, double s);
Var abs(Tape& t, Var a);
Var square(Tape& t, Var a);
Var reciprocal(Tape& t, Var a);  // elementwise 1/x

// ---- activations ----
Var relu(Tape& t, Var a);
Var gelu(Tape& t, Var a);  // exact erf form
Var sine(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var tanh_op(Tape& t, Var a);

// ---- reductions ----
Var sum(Tape& t, Var a);   // -> shape {1}
Var mean(Tape& t, Var a);  // -> shape {1}

// ---- linear algebra ----
Var matmul(Tape& t, Var a, Var b);     // (M,K)x(K,N)
Var matmul_nt(Tape& t, Var a, Var b);  // (M,K)x(N,K)^T -> (M,N)
/// y = x w^T + b with x (N,in), w (out,in), b (out) or invalid.
Var linear(Tape& t, Var x, Var w, Var b);

// ---- shape ----
Var reshape(Tape& t, Var a, std::vector<std::int64_t> shape);
Var transpose2d(Tape& t, Var a);  // (N,M) -> (M,N)
Var slice_rows(Tape& t, Var a, std::int64_t r0, std::int64_t r1);
Var slice_cols(Tape& t, Var a, std::int64_t c0, std::int64_t c1);
Var concat_rows(Tape& t, const std::vector<Var>& parts);
Var concat_cols(Tape& t, const std::vector<Var>& parts);

// ---- broadcasting over feature maps (C,H,W) ----
Var add_channel(Tape& t, Var x, Var v);  // +v[c]
Var mul_channel(Tape& t, Var x, Var v);  // *v[c]
Var add_row_broadcast(Tape& t, Var x, Var v);  // x (N,M) + v (M) per row

// ---- structured ops ----
/// Same-size 2-D convolution layer primitive. x (Cin,H,W), w
/// (Cout,Cin/groups,kh,kw), optional b (Cout). Output (Cout, H+2ph-kh+1,
/// W+2pw-kw+1); pass ph=kh/2, pw=kw/2 for "same" with odd kernels.
Var conv2d(Tape& t, Var x, Var w, Var b, int groups, int ph, int pw);

/// (C*sh*sw, H, W) -> (C, H*sh, W*sw), channel index c*(sh*sw)+dy*sw+dx
/// lands at spatial offset (dy,dx).
Var pixel_shuffle(Tape& t, Var x, int sh, int sw);

/// Half-pixel bilinear upsampling, (C,H,W) -> (C,H*sh,W*sw).
Var bilinear_upsample(Tape& t, Var x, int sh, int sw);

/// Normalize across channels at each spatial position; gamma/beta are (C).
Var layer_norm_channels(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);

/// Normalize each row of x (N,D); gamma/beta are (D).
Var layer_norm_rows(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);

Var softmax_rows(Tape& t, Var x);

/// Per-row x/||x||_2 with epsilon inside the sqrt.
Var row_l2_normalize(Tape& t, Var x, double eps);

/// Flatten tokens (count,d) and tile the count*d period to a length-L vector:
/// out[p] = tokens[(p % (count*d)) / d, p % d].
Var tile_rows_to(Tape& t, Var tokens, std::int64_t total_len);

/// x (C,H,W) + p[(y%sh)*sw + (x%sw), c]; adds a per-phase channel vector on
/// the pixel-shuffle lattice.
Var add_phase_broadcast(Tape& t, Var x, Var p, int sh, int sw);

// Plain-tensor helpers shared with non-autodiff code paths.
Tensor pixel_shuffle_tensor(const Tensor& x, int sh, int sw);
Tensor pixel_unshuffle_tensor(const Tensor& x, int sh, int sw);

}  // namespace nervkit::ad
