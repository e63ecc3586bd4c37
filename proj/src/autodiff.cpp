// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace nervkit::ad {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Var make_node(Tape& t, Tensor value, bool requires_grad, std::function<void(Tape&)> backprop) {
    Tape::Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.backprop = std::move(backprop);
    t.nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(t.nodes_.size() - 1)};
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    return make_node(*this, std::move(value), requires_grad, {});
}

Tensor& Tape::grad(Var v) {
    Node& n = nodes_[v.id];
    if (!n.grad_alloc) {
        n.grad = Tensor::zeros(n.value.shape());
        n.grad_alloc = true;
    }
    return n.grad;
}

void Tape::backward(Var root) {
    if (!root.valid()) throw ContractViolation("backward: invalid root");
    if (nodes_[root.id].value.numel() != 1) throw ContractViolation("backward: root must be scalar");
    grad(root).fill(1.0);
    for (std::int32_t i = root.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.grad_alloc && n.backprop) n.backprop(*this);
    }
}

void Tape::clear() { nodes_.clear(); }

namespace {

bool need(const Tape& t, Var a) { return a.valid() && t.requires_grad(a); }

void check_same_shape(const Tape& t, Var a, Var b, const char* op) {
    if (!t.val(a).same_shape(t.val(b)))
        throw ContractViolation(std::string(op) + ": shape mismatch " + t.val(a).shape_str() + " vs " +
                                t.val(b).shape_str());
}

/// Elementwise unary op helper: f(value) and df(value, y) give y and dy/dx.
template <typename F, typename DF>
Var unary(Tape& t, Var a, F f, DF df) {
    const Tensor& x = t.val(a);
    Tensor y(x.shape());
    const double* xd = x.data();
    double* yd = y.data();
    for (std::int64_t i = 0; i < x.numel(); ++i) yd[i] = f(xd[i]);
    bool rg = need(t, a);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, out, df](Tape& tp) {
            const Tensor& g = tp.grad(out);
            const Tensor& x2 = tp.val(a);
            const Tensor& y2 = tp.val(out);
            Tensor& ga = tp.grad(a);
            for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * df(x2[i], y2[i]);
        };
    }
    return out;
}

}  // namespace

Var add(Tape& t, Var a, Var b) { return scale_add(t, a, b, 1.0, 1.0); }
Var sub(Tape& t, Var a, Var b) { return scale_add(t, a, b, 1.0, -1.0); }

Var scale_add(Tape& t, Var a, Var b, double alpha, double beta) {
    check_same_shape(t, a, b, "scale_add");
    const Tensor& xa = t.val(a);
    const Tensor& xb = t.val(b);
    Tensor y(xa.shape());
    for (std::int64_t i = 0; i < xa.numel(); ++i) y[i] = alpha * xa[i] + beta * xb[i];
    bool rg = need(t, a) || need(t, b);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, b, out, alpha, beta](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(a)) tp.grad(a).add_scaled(g, alpha);
            if (tp.requires_grad(b)) tp.grad(b).add_scaled(g, beta);
        };
    }
    return out;
}

Var mul(Tape& t, Var a, Var b) {
    check_same_shape(t, a, b, "mul");
    const Tensor& xa = t.val(a);
    const Tensor& xb = t.val(b);
    Tensor y(xa.shape());
    for (std::int64_t i = 0; i < xa.numel(); ++i) y[i] = xa[i] * xb[i];
    bool rg = need(t, a) || need(t, b);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, b, out](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(a)) {
                Tensor& ga = tp.grad(a);
                const Tensor& vb = tp.val(b);
                for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * vb[i];
            }
            if (tp.requires_grad(b)) {
                Tensor& gb = tp.grad(b);
                const Tensor& va = tp.val(a);
                for (std::int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * va[i];
            }
        };
    }
    return out;
}

Var add_scalar(Tape& t, Var a, double s) {
    return unary(t, a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var mul_scalar(Tape& t, Var a, double s) {
    return unary(t, a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Var abs(Tape& t, Var a) {
    return unary(
        t, a, [](double x) { return std::abs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var square(Tape& t, Var a) {
    return unary(t, a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var reciprocal(Tape& t, Var a) {
    return unary(t, a, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Var relu(Tape& t, Var a) {
    return unary(
        t, a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Tape& t, Var a) {
    return unary(
        t, a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
        [](double x, double) {
            double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
}

Var sine(Tape& t, Var a) {
    return unary(t, a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Var sigmoid(Tape& t, Var a) {
    return unary(
        t, a,
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Var tanh_op(Tape& t, Var a) {
    return unary(t, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sum(Tape& t, Var a) {
    const Tensor& x = t.val(a);
    Tensor y({1});
    y[0] = x.sum();
    bool rg = need(t, a);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, out](Tape& tp) {
            double g = tp.grad(out)[0];
            Tensor& ga = tp.grad(a);
            for (std::int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
        };
    }
    return out;
}

Var mean(Tape& t, Var a) {
    std::int64_t n = t.val(a).numel();
    if (n == 0) throw ContractViolation("mean of empty tensor");
    return mul_scalar(t, sum(t, a), 1.0 / static_cast<double>(n));
}

Var matmul(Tape& t, Var a, Var b) {
    const Tensor& xa = t.val(a);
    const Tensor& xb = t.val(b);
    if (xa.rank() != 2 || xb.rank() != 2 || xa.dim(1) != xb.dim(0))
        throw ContractViolation("matmul: incompatible shapes " + xa.shape_str() + " x " + xb.shape_str());
    std::int64_t m = xa.dim(0), k = xa.dim(1), n = xb.dim(1);
    Tensor y({m, n});
    gemm_nn(xa.data(), xb.data(), y.data(), m, k, n);
    bool rg = need(t, a) || need(t, b);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, b, out, m, k, n](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(a))  // dA = G * B^T
                gemm_nt(g.data(), tp.val(b).data(), tp.grad(a).data(), m, n, k);
            if (tp.requires_grad(b))  // dB = A^T * G
                gemm_tn(tp.val(a).data(), g.data(), tp.grad(b).data(), k, m, n);
        };
    }
    return out;
}

Var matmul_nt(Tape& t, Var a, Var b) {
    const Tensor& xa = t.val(a);
    const Tensor& xb = t.val(b);
    if (xa.rank() != 2 || xb.rank() != 2 || xa.dim(1) != xb.dim(1))
        throw ContractViolation("matmul_nt: incompatible shapes " + xa.shape_str() + " x " + xb.shape_str());
    std::int64_t m = xa.dim(0), k = xa.dim(1), n = xb.dim(0);
    Tensor y({m, n});
    gemm_nt(xa.data(), xb.data(), y.data(), m, k, n);
    bool rg = need(t, a) || need(t, b);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, b, out, m, k, n](Tape& tp) {
            const Tensor& g = tp.grad(out);  // (m,n)
            if (tp.requires_grad(a))         // dA = G * B
                gemm_nn(g.data(), tp.val(b).data(), tp.grad(a).data(), m, n, k);
            if (tp.requires_grad(b))  // dB = G^T * A
                gemm_tn(g.data(), tp.val(a).data(), tp.grad(b).data(), n, m, k);
        };
    }
    return out;
}

Var linear(Tape& t, Var x, Var w, Var b) {
    const Tensor& xv = t.val(x);
    const Tensor& wv = t.val(w);
    if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(1))
        throw ContractViolation("linear: incompatible shapes " + xv.shape_str() + " vs w " + wv.shape_str());
    Var y = matmul_nt(t, x, w);
    if (b.valid()) y = add_row_broadcast(t, y, b);
    return y;
}

Var reshape(Tape& t, Var a, std::vector<std::int64_t> shape) {
    Tensor y = t.val(a).reshaped(shape);
    bool rg = need(t, a);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, out](Tape& tp) {
            const Tensor& g = tp.grad(out);
            Tensor& ga = tp.grad(a);
            for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
        };
    }
    return out;
}

Var transpose2d(Tape& t, Var a) {
    const Tensor& x = t.val(a);
    if (x.rank() != 2) throw ContractViolation("transpose2d: expects (N,M)");
    std::int64_t n = x.dim(0), m = x.dim(1);
    Tensor y({m, n});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < m; ++j) y[j * n + i] = x[i * m + j];
    bool rg = need(t, a);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, out, n, m](Tape& tp) {
            const Tensor& g = tp.grad(out);
            Tensor& ga = tp.grad(a);
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < m; ++j) ga[i * m + j] += g[j * n + i];
        };
    }
    return out;
}

Var slice_rows(Tape& t, Var a, std::int64_t r0, std::int64_t r1) {
    const Tensor& x = t.val(a);
    if (x.rank() != 2 || r0 < 0 || r1 > x.dim(0) || r0 >= r1)
        throw ContractViolation("slice_rows: bad range");
    std::int64_t cols = x.dim(1);
    Tensor y({r1 - r0, cols});
    std::copy(x.data() + r0 * cols, x.data() + r1 * cols, y.data());
    bool rg = need(t, a);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, out, r0, cols](Tape& tp) {
            const Tensor& g = tp.grad(out);
            Tensor& ga = tp.grad(a);
            double* dst = ga.data() + r0 * cols;
            for (std::int64_t i = 0; i < g.numel(); ++i) dst[i] += g[i];
        };
    }
    return out;
}

Var slice_cols(Tape& t, Var a, std::int64_t c0, std::int64_t c1) {
    const Tensor& x = t.val(a);
    if (x.rank() != 2 || c0 < 0 || c1 > x.dim(1) || c0 >= c1)
        throw ContractViolation("slice_cols: bad range");
    std::int64_t rows = x.dim(0), cols = x.dim(1), w = c1 - c0;
    Tensor y({rows, w});
    for (std::int64_t r = 0; r < rows; ++r)
        std::copy(x.data() + r * cols + c0, x.data() + r * cols + c1, y.data() + r * w);
    bool rg = need(t, a);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [a, out, c0, cols, w, rows](Tape& tp) {
            const Tensor& g = tp.grad(out);
            Tensor& ga = tp.grad(a);
            for (std::int64_t r = 0; r < rows; ++r) {
                const double* gs = g.data() + r * w;
                double* gd = ga.data() + r * cols + c0;
                for (std::int64_t j = 0; j < w; ++j) gd[j] += gs[j];
            }
        };
    }
    return out;
}

Var concat_rows(Tape& t, const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractViolation("concat_rows: no parts");
    std::int64_t cols = t.val(parts[0]).dim(1);
    std::int64_t rows = 0;
    bool rg = false;
    for (Var p : parts) {
        const Tensor& x = t.val(p);
        if (x.rank() != 2 || x.dim(1) != cols) throw ContractViolation("concat_rows: column mismatch");
        rows += x.dim(0);
        rg = rg || need(t, p);
    }
    Tensor y({rows, cols});
    std::int64_t off = 0;
    for (Var p : parts) {
        const Tensor& x = t.val(p);
        std::copy(x.data(), x.data() + x.numel(), y.data() + off);
        off += x.numel();
    }
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        std::vector<Var> ps = parts;
        t.node_mut(out).backprop = [ps, out](Tape& tp) {
            const Tensor& g = tp.grad(out);
            std::int64_t off2 = 0;
            for (Var p : ps) {
                std::int64_t n = tp.val(p).numel();
                if (tp.requires_grad(p)) {
                    Tensor& gp = tp.grad(p);
                    const double* gs = g.data() + off2;
                    for (std::int64_t i = 0; i < n; ++i) gp[i] += gs[i];
                }
                off2 += n;
            }
        };
    }
    return out;
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractViolation("concat_cols: no parts");
    std::int64_t rows = t.val(parts[0]).dim(0);
    std::int64_t cols = 0;
    bool rg = false;
    for (Var p : parts) {
        const Tensor& x = t.val(p);
        if (x.rank() != 2 || x.dim(0) != rows) throw ContractViolation("concat_cols: row mismatch");
        cols += x.dim(1);
        rg = rg || need(t, p);
    }
    Tensor y({rows, cols});
    std::int64_t coff = 0;
    for (Var p : parts) {
        const Tensor& x = t.val(p);
        std::int64_t w = x.dim(1);
        for (std::int64_t r = 0; r < rows; ++r)
            std::copy(x.data() + r * w, x.data() + (r + 1) * w, y.data() + r * cols + coff);
        coff += w;
    }
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        std::vector<Var> ps = parts;
        t.node_mut(out).backprop = [ps, out, rows, cols](Tape& tp) {
            const Tensor& g = tp.grad(out);
            std::int64_t coff2 = 0;
            for (Var p : ps) {
                std::int64_t w = tp.val(p).dim(1);
                if (tp.requires_grad(p)) {
                    Tensor& gp = tp.grad(p);
                    for (std::int64_t r = 0; r < rows; ++r) {
                        const double* gs = g.data() + r * cols + coff2;
                        double* gd = gp.data() + r * w;
                        for (std::int64_t j = 0; j < w; ++j) gd[j] += gs[j];
                    }
                }
                coff2 += w;
            }
        };
    }
    return out;
}

Var add_channel(Tape& t, Var x, Var v) {
    const Tensor& xv = t.val(x);
    const Tensor& vv = t.val(v);
    if (xv.rank() != 3 || vv.numel() != xv.dim(0)) throw ContractViolation("add_channel: shape mismatch");
    std::int64_t c = xv.dim(0), hw = xv.dim(1) * xv.dim(2);
    Tensor y(xv.shape());
    for (std::int64_t ci = 0; ci < c; ++ci) {
        double b = vv[ci];
        const double* xs = xv.data() + ci * hw;
        double* yd = y.data() + ci * hw;
        for (std::int64_t i = 0; i < hw; ++i) yd[i] = xs[i] + b;
    }
    bool rg = need(t, x) || need(t, v);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, v, out, c, hw](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(x)) tp.grad(x).add_scaled(g, 1.0);
            if (tp.requires_grad(v)) {
                Tensor& gv = tp.grad(v);
                for (std::int64_t ci = 0; ci < c; ++ci) {
                    const double* gs = g.data() + ci * hw;
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < hw; ++i) acc += gs[i];
                    gv[ci] += acc;
                }
            }
        };
    }
    return out;
}

Var mul_channel(Tape& t, Var x, Var v) {
    const Tensor& xv = t.val(x);
    const Tensor& vv = t.val(v);
    if (xv.rank() != 3 || vv.numel() != xv.dim(0)) throw ContractViolation("mul_channel: shape mismatch");
    std::int64_t c = xv.dim(0), hw = xv.dim(1) * xv.dim(2);
    Tensor y(xv.shape());
    for (std::int64_t ci = 0; ci < c; ++ci) {
        double s = vv[ci];
        const double* xs = xv.data() + ci * hw;
        double* yd = y.data() + ci * hw;
        for (std::int64_t i = 0; i < hw; ++i) yd[i] = xs[i] * s;
    }
    bool rg = need(t, x) || need(t, v);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, v, out, c, hw](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(x)) {
                Tensor& gx = tp.grad(x);
                const Tensor& vv2 = tp.val(v);
                for (std::int64_t ci = 0; ci < c; ++ci) {
                    double s = vv2[ci];
                    const double* gs = g.data() + ci * hw;
                    double* gd = gx.data() + ci * hw;
                    for (std::int64_t i = 0; i < hw; ++i) gd[i] += gs[i] * s;
                }
            }
            if (tp.requires_grad(v)) {
                Tensor& gv = tp.grad(v);
                const Tensor& xv2 = tp.val(x);
                for (std::int64_t ci = 0; ci < c; ++ci) {
                    const double* gs = g.data() + ci * hw;
                    const double* xs = xv2.data() + ci * hw;
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < hw; ++i) acc += gs[i] * xs[i];
                    gv[ci] += acc;
                }
            }
        };
    }
    return out;
}

Var add_row_broadcast(Tape& t, Var x, Var v) {
    const Tensor& xv = t.val(x);
    const Tensor& vv = t.val(v);
    if (xv.rank() != 2 || vv.numel() != xv.dim(1)) throw ContractViolation("add_row_broadcast: shape mismatch");
    std::int64_t rows = xv.dim(0), cols = xv.dim(1);
    Tensor y(xv.shape());
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xs = xv.data() + r * cols;
        double* yd = y.data() + r * cols;
        for (std::int64_t j = 0; j < cols; ++j) yd[j] = xs[j] + vv[j];
    }
    bool rg = need(t, x) || need(t, v);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, v, out, rows, cols](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(x)) tp.grad(x).add_scaled(g, 1.0);
            if (tp.requires_grad(v)) {
                Tensor& gv = tp.grad(v);
                for (std::int64_t r = 0; r < rows; ++r) {
                    const double* gs = g.data() + r * cols;
                    for (std::int64_t j = 0; j < cols; ++j) gv[j] += gs[j];
                }
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// conv2d

namespace {

struct ConvDims {
    std::int64_t cin, h, w, cout, kh, kw, ho, wo, cig, cog;
    int groups, ph, pw;
};

ConvDims conv_dims(const Tensor& x, const Tensor& wt, int groups, int ph, int pw) {
    if (x.rank() != 3 || wt.rank() != 4) throw ContractViolation("conv2d: expects x rank 3, w rank 4");
    ConvDims d{};
    d.cin = x.dim(0);
    d.h = x.dim(1);
    d.w = x.dim(2);
    d.cout = wt.dim(0);
    d.kh = wt.dim(2);
    d.kw = wt.dim(3);
    d.groups = groups;
    d.ph = ph;
    d.pw = pw;
    if (groups < 1 || d.cin % groups != 0 || d.cout % groups != 0)
        throw ContractViolation("conv2d: channels not divisible by groups");
    d.cig = d.cin / groups;
    d.cog = d.cout / groups;
    if (wt.dim(1) != d.cig) throw ContractViolation("conv2d: weight in-channel mismatch");
    d.ho = d.h + 2 * ph - d.kh + 1;
    d.wo = d.w + 2 * pw - d.kw + 1;
    if (d.ho < 1 || d.wo < 1) throw ContractViolation("conv2d: output would be empty");
    return d;
}

// Gather the (cig*kh*kw, rows*wo) column matrix for output rows [y0, y0+rows).
void im2col_strip(const Tensor& x, const ConvDims& d, std::int64_t gi, std::int64_t y0, std::int64_t rows,
                  std::vector<double>& col) {
    const std::int64_t k = d.cig * d.kh * d.kw;
    col.assign(static_cast<std::size_t>(k * rows * d.wo), 0.0);
    for (std::int64_t c = 0; c < d.cig; ++c) {
        const double* xc = x.data() + (gi * d.cig + c) * d.h * d.w;
        for (std::int64_t ky = 0; ky < d.kh; ++ky) {
            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                double* dst = col.data() + ((c * d.kh + ky) * d.kw + kx) * rows * d.wo;
                for (std::int64_t ry = 0; ry < rows; ++ry) {
                    std::int64_t sy = y0 + ry + ky - d.ph;
                    double* drow = dst + ry * d.wo;
                    if (sy < 0 || sy >= d.h) continue;
                    const double* srow = xc + sy * d.w;
                    std::int64_t ox_lo = std::max<std::int64_t>(0, d.pw - kx);
                    std::int64_t ox_hi = std::min(d.wo, d.w + d.pw - kx);
                    for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox) drow[ox] = srow[ox + kx - d.pw];
                }
            }
        }
    }
}

// Scatter-add the column-matrix gradient back into dx for the same strip.
void col2im_strip(Tensor& dx, const ConvDims& d, std::int64_t gi, std::int64_t y0, std::int64_t rows,
                  const std::vector<double>& col) {
    for (std::int64_t c = 0; c < d.cig; ++c) {
        double* xc = dx.data() + (gi * d.cig + c) * d.h * d.w;
        for (std::int64_t ky = 0; ky < d.kh; ++ky) {
            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                const double* src = col.data() + ((c * d.kh + ky) * d.kw + kx) * rows * d.wo;
                for (std::int64_t ry = 0; ry < rows; ++ry) {
                    std::int64_t sy = y0 + ry + ky - d.ph;
                    if (sy < 0 || sy >= d.h) continue;
                    const double* srow = src + ry * d.wo;
                    double* drow = xc + sy * d.w;
                    std::int64_t ox_lo = std::max<std::int64_t>(0, d.pw - kx);
                    std::int64_t ox_hi = std::min(d.wo, d.w + d.pw - kx);
                    for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox) drow[ox + kx - d.pw] += srow[ox];
                }
            }
        }
    }
}

std::int64_t strip_rows(const ConvDims& d) {
    // Cap the im2col buffer at ~4 MB so full-resolution maps stay bounded.
    const std::int64_t budget = 512 * 1024;
    std::int64_t per_row = d.cig * d.kh * d.kw * d.wo;
    return std::clamp<std::int64_t>(budget / std::max<std::int64_t>(per_row, 1), 1, d.ho);
}

}  // namespace

Var conv2d(Tape& t, Var x, Var w, Var b, int groups, int ph, int pw) {
    const Tensor& xv = t.val(x);
    const Tensor& wv = t.val(w);
    ConvDims d = conv_dims(xv, wv, groups, ph, pw);
    if (b.valid() && t.val(b).numel() != d.cout) throw ContractViolation("conv2d: bias size mismatch");

    Tensor y({d.cout, d.ho, d.wo});
    std::vector<double> col;
    const std::int64_t k = d.cig * d.kh * d.kw;
    const std::int64_t strip = strip_rows(d);
    for (std::int64_t gi = 0; gi < d.groups; ++gi) {
        const double* wg = wv.data() + gi * d.cog * k;
        for (std::int64_t y0 = 0; y0 < d.ho; y0 += strip) {
            std::int64_t rows = std::min(strip, d.ho - y0);
            im2col_strip(xv, d, gi, y0, rows, col);
            // out_g(cog, rows*wo) += Wg(cog,k) * col(k, rows*wo)
            for (std::int64_t co = 0; co < d.cog; ++co) {
                double* dst = y.data() + (gi * d.cog + co) * d.ho * d.wo + y0 * d.wo;
                gemm_nn(wg + co * k, col.data(), dst, 1, k, rows * d.wo);
            }
        }
    }
    if (b.valid()) {
        const Tensor& bv = t.val(b);
        for (std::int64_t c = 0; c < d.cout; ++c) {
            double* yc = y.data() + c * d.ho * d.wo;
            double add = bv[c];
            for (std::int64_t i = 0; i < d.ho * d.wo; ++i) yc[i] += add;
        }
    }

    bool rg = need(t, x) || need(t, w) || need(t, b);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, w, b, out, d](Tape& tp) {
            const Tensor& g = tp.grad(out);
            const std::int64_t k = d.cig * d.kh * d.kw;
            const std::int64_t strip = strip_rows(d);
            std::vector<double> col, dcol;
            const bool want_x = tp.requires_grad(x);
            const bool want_w = tp.requires_grad(w);
            for (std::int64_t gi = 0; gi < d.groups; ++gi) {
                const double* wg = tp.val(w).data() + gi * d.cog * k;
                for (std::int64_t y0 = 0; y0 < d.ho; y0 += strip) {
                    std::int64_t rows = std::min(strip, d.ho - y0);
                    std::int64_t cols_n = rows * d.wo;
                    if (want_w || want_x) im2col_strip(tp.val(x), d, gi, y0, rows, col);
                    if (want_w) {
                        Tensor& gw = tp.grad(w);
                        for (std::int64_t co = 0; co < d.cog; ++co) {
                            const double* grow = g.data() + (gi * d.cog + co) * d.ho * d.wo + y0 * d.wo;
                            // dW(co,:) += grow(1, cols) * col^T(cols, k)
                            gemm_nt(grow, col.data(), gw.data() + (gi * d.cog + co) * k, 1, cols_n, k);
                        }
                    }
                    if (want_x) {
                        dcol.assign(static_cast<std::size_t>(k * cols_n), 0.0);
                        for (std::int64_t co = 0; co < d.cog; ++co) {
                            const double* grow = g.data() + (gi * d.cog + co) * d.ho * d.wo + y0 * d.wo;
                            // dcol(k, cols) += Wg(co,:)^T(k,1) * grow(1, cols)
                            gemm_tn(wg + co * k, grow, dcol.data(), k, 1, cols_n);
                        }
                        col2im_strip(tp.grad(x), d, gi, y0, rows, dcol);
                    }
                }
            }
            if (b.valid() && tp.requires_grad(b)) {
                Tensor& gb = tp.grad(b);
                for (std::int64_t c = 0; c < d.cout; ++c) {
                    const double* gc = g.data() + c * d.ho * d.wo;
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < d.ho * d.wo; ++i) acc += gc[i];
                    gb[c] += acc;
                }
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// pixel shuffle

namespace {
void shuffle_copy(const double* src, double* dst, std::int64_t c, std::int64_t h, std::int64_t w, int sh, int sw) {
    // src is (c*sh*sw, h, w), dst is (c, h*sh, w*sw)
    const std::int64_t wo = w * sw;
    for (std::int64_t ci = 0; ci < c; ++ci)
        for (int dy = 0; dy < sh; ++dy)
            for (int dx = 0; dx < sw; ++dx) {
                const double* s = src + ((ci * sh + dy) * sw + dx) * h * w;
                for (std::int64_t y = 0; y < h; ++y) {
                    double* drow = dst + ci * (h * sh) * wo + (y * sh + dy) * wo + dx;
                    const double* srow = s + y * w;
                    for (std::int64_t x = 0; x < w; ++x) drow[x * sw] = srow[x];
                }
            }
}

void unshuffle_copy(const double* src, double* dst, std::int64_t c, std::int64_t h, std::int64_t w, int sh, int sw,
                    bool accumulate) {
    // src is (c, h*sh, w*sw), dst is (c*sh*sw, h, w)
    const std::int64_t wo = w * sw;
    for (std::int64_t ci = 0; ci < c; ++ci)
        for (int dy = 0; dy < sh; ++dy)
            for (int dx = 0; dx < sw; ++dx) {
                double* d = dst + ((ci * sh + dy) * sw + dx) * h * w;
                for (std::int64_t y = 0; y < h; ++y) {
                    const double* srow = src + ci * (h * sh) * wo + (y * sh + dy) * wo + dx;
                    double* drow = d + y * w;
                    for (std::int64_t x = 0; x < w; ++x) {
                        if (accumulate)
                            drow[x] += srow[x * sw];
                        else
                            drow[x] = srow[x * sw];
                    }
                }
            }
}
}  // namespace

Tensor pixel_shuffle_tensor(const Tensor& x, int sh, int sw) {
    if (x.rank() != 3) throw ContractViolation("pixel_shuffle: expects (C,H,W)");
    if (sh < 1 || sw < 1) throw ContractViolation("pixel_shuffle: strides must be >= 1");
    std::int64_t cin = x.dim(0);
    if (cin % (static_cast<std::int64_t>(sh) * sw) != 0)
        throw ContractViolation("pixel_shuffle: " + std::to_string(cin) + " channels not divisible by " +
                                std::to_string(sh) + "x" + std::to_string(sw));
    std::int64_t c = cin / (sh * sw);
    Tensor y({c, x.dim(1) * sh, x.dim(2) * sw});
    shuffle_copy(x.data(), y.data(), c, x.dim(1), x.dim(2), sh, sw);
    return y;
}

Tensor pixel_unshuffle_tensor(const Tensor& x, int sh, int sw) {
    if (x.rank() != 3) throw ContractViolation("pixel_unshuffle: expects (C,H,W)");
    if (x.dim(1) % sh != 0 || x.dim(2) % sw != 0)
        throw ContractViolation("pixel_unshuffle: spatial dims not divisible by stride");
    std::int64_t c = x.dim(0), h = x.dim(1) / sh, w = x.dim(2) / sw;
    Tensor y({c * sh * sw, h, w});
    unshuffle_copy(x.data(), y.data(), c, h, w, sh, sw, false);
    return y;
}

Var pixel_shuffle(Tape& t, Var x, int sh, int sw) {
    Tensor y = pixel_shuffle_tensor(t.val(x), sh, sw);
    std::int64_t c = y.dim(0), h = t.val(x).dim(1), w = t.val(x).dim(2);
    bool rg = need(t, x);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, out, c, h, w, sh, sw](Tape& tp) {
            unshuffle_copy(tp.grad(out).data(), tp.grad(x).data(), c, h, w, sh, sw, true);
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// bilinear upsample (half-pixel sampling, clamped at borders)

namespace {
struct LerpAxis {
    std::vector<std::int64_t> i0, i1;
    std::vector<double> f;  // weight of i1
};

LerpAxis make_axis(std::int64_t in, std::int64_t out, int s) {
    LerpAxis ax;
    ax.i0.resize(out);
    ax.i1.resize(out);
    ax.f.resize(out);
    for (std::int64_t o = 0; o < out; ++o) {
        double src = (static_cast<double>(o) + 0.5) / s - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        std::int64_t lo = static_cast<std::int64_t>(std::floor(src));
        lo = std::min(lo, in - 1);
        ax.i0[o] = lo;
        ax.i1[o] = std::min(lo + 1, in - 1);
        ax.f[o] = src - static_cast<double>(lo);
    }
    return ax;
}
}  // namespace

Var bilinear_upsample(Tape& t, Var x, int sh, int sw) {
    const Tensor& xv = t.val(x);
    if (xv.rank() != 3) throw ContractViolation("bilinear_upsample: expects (C,H,W)");
    std::int64_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    std::int64_t ho = h * sh, wo = w * sw;
    LerpAxis ay = make_axis(h, ho, sh), axx = make_axis(w, wo, sw);
    Tensor y({c, ho, wo});
    for (std::int64_t ci = 0; ci < c; ++ci) {
        const double* xc = xv.data() + ci * h * w;
        double* yc = y.data() + ci * ho * wo;
        for (std::int64_t oy = 0; oy < ho; ++oy) {
            const double fy = ay.f[oy];
            const double* r0 = xc + ay.i0[oy] * w;
            const double* r1 = xc + ay.i1[oy] * w;
            double* yrow = yc + oy * wo;
            for (std::int64_t ox = 0; ox < wo; ++ox) {
                const double fx = axx.f[ox];
                const std::int64_t x0 = axx.i0[ox], x1 = axx.i1[ox];
                double top = r0[x0] * (1 - fx) + r0[x1] * fx;
                double bot = r1[x0] * (1 - fx) + r1[x1] * fx;
                yrow[ox] = top * (1 - fy) + bot * fy;
            }
        }
    }
    bool rg = need(t, x);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, out, c, h, w, ho, wo, ay, axx](Tape& tp) {
            const Tensor& g = tp.grad(out);
            Tensor& gx = tp.grad(x);
            for (std::int64_t ci = 0; ci < c; ++ci) {
                double* xc = gx.data() + ci * h * w;
                const double* gc = g.data() + ci * ho * wo;
                for (std::int64_t oy = 0; oy < ho; ++oy) {
                    const double fy = ay.f[oy];
                    double* r0 = xc + ay.i0[oy] * w;
                    double* r1 = xc + ay.i1[oy] * w;
                    const double* grow = gc + oy * wo;
                    for (std::int64_t ox = 0; ox < wo; ++ox) {
                        const double fx = axx.f[ox];
                        const std::int64_t x0 = axx.i0[ox], x1 = axx.i1[ox];
                        const double gv = grow[ox];
                        r0[x0] += gv * (1 - fy) * (1 - fx);
                        r0[x1] += gv * (1 - fy) * fx;
                        r1[x0] += gv * fy * (1 - fx);
                        r1[x1] += gv * fy * fx;
                    }
                }
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// layer norm over channels

Var layer_norm_channels(Tape& t, Var x, Var gamma, Var beta, double eps) {
    const Tensor& xv = t.val(x);
    if (xv.rank() != 3) throw ContractViolation("layer_norm_channels: expects (C,H,W)");
    std::int64_t c = xv.dim(0), hw = xv.dim(1) * xv.dim(2);
    if (t.val(gamma).numel() != c || t.val(beta).numel() != c)
        throw ContractViolation("layer_norm_channels: gamma/beta size mismatch");

    Tensor y(xv.shape());
    Tensor xhat(xv.shape());
    Tensor inv_std({hw});
    const Tensor& gv = t.val(gamma);
    const Tensor& bv = t.val(beta);
    for (std::int64_t p = 0; p < hw; ++p) {
        double m = 0.0;
        for (std::int64_t ci = 0; ci < c; ++ci) m += xv[ci * hw + p];
        m /= static_cast<double>(c);
        double var = 0.0;
        for (std::int64_t ci = 0; ci < c; ++ci) {
            double d = xv[ci * hw + p] - m;
            var += d * d;
        }
        var /= static_cast<double>(c);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[p] = is;
        for (std::int64_t ci = 0; ci < c; ++ci) {
            double h = (xv[ci * hw + p] - m) * is;
            xhat[ci * hw + p] = h;
            y[ci * hw + p] = gv[ci] * h + bv[ci];
        }
    }
    bool rg = need(t, x) || need(t, gamma) || need(t, beta);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        auto xh = std::make_shared<Tensor>(std::move(xhat));
        auto is_buf = std::make_shared<Tensor>(std::move(inv_std));
        t.node_mut(out).backprop = [x, gamma, beta, out, c, hw, xh, is_buf](Tape& tp) {
            const Tensor& g = tp.grad(out);
            const Tensor& gv2 = tp.val(gamma);
            if (tp.requires_grad(gamma)) {
                Tensor& gg = tp.grad(gamma);
                for (std::int64_t ci = 0; ci < c; ++ci) {
                    double acc = 0.0;
                    for (std::int64_t p = 0; p < hw; ++p) acc += g[ci * hw + p] * (*xh)[ci * hw + p];
                    gg[ci] += acc;
                }
            }
            if (tp.requires_grad(beta)) {
                Tensor& gb = tp.grad(beta);
                for (std::int64_t ci = 0; ci < c; ++ci) {
                    double acc = 0.0;
                    for (std::int64_t p = 0; p < hw; ++p) acc += g[ci * hw + p];
                    gb[ci] += acc;
                }
            }
            if (tp.requires_grad(x)) {
                Tensor& gx = tp.grad(x);
                for (std::int64_t p = 0; p < hw; ++p) {
                    double sum_dh = 0.0, sum_dh_h = 0.0;
                    for (std::int64_t ci = 0; ci < c; ++ci) {
                        double dh = g[ci * hw + p] * gv2[ci];
                        sum_dh += dh;
                        sum_dh_h += dh * (*xh)[ci * hw + p];
                    }
                    double invc = 1.0 / static_cast<double>(c);
                    double is = (*is_buf)[p];
                    for (std::int64_t ci = 0; ci < c; ++ci) {
                        double dh = g[ci * hw + p] * gv2[ci];
                        gx[ci * hw + p] +=
                            is * (dh - invc * sum_dh - (*xh)[ci * hw + p] * invc * sum_dh_h);
                    }
                }
            }
        };
    }
    return out;
}

Var layer_norm_rows(Tape& t, Var x, Var gamma, Var beta, double eps) {
    const Tensor& xv = t.val(x);
    if (xv.rank() != 2) throw ContractViolation("layer_norm_rows: expects (N,D)");
    std::int64_t rows = xv.dim(0), d = xv.dim(1);
    if (t.val(gamma).numel() != d || t.val(beta).numel() != d)
        throw ContractViolation("layer_norm_rows: gamma/beta size mismatch");

    Tensor y(xv.shape());
    Tensor xhat(xv.shape());
    Tensor inv_std({rows});
    const Tensor& gv = t.val(gamma);
    const Tensor& bv = t.val(beta);
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xs = xv.data() + r * d;
        double m = 0.0;
        for (std::int64_t j = 0; j < d; ++j) m += xs[j];
        m /= static_cast<double>(d);
        double var = 0.0;
        for (std::int64_t j = 0; j < d; ++j) {
            double dv = xs[j] - m;
            var += dv * dv;
        }
        var /= static_cast<double>(d);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::int64_t j = 0; j < d; ++j) {
            double h = (xs[j] - m) * is;
            xhat[r * d + j] = h;
            y[r * d + j] = gv[j] * h + bv[j];
        }
    }
    bool rg = need(t, x) || need(t, gamma) || need(t, beta);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        auto xh = std::make_shared<Tensor>(std::move(xhat));
        auto is_buf = std::make_shared<Tensor>(std::move(inv_std));
        t.node_mut(out).backprop = [x, gamma, beta, out, rows, d, xh, is_buf](Tape& tp) {
            const Tensor& g = tp.grad(out);
            const Tensor& gv2 = tp.val(gamma);
            if (tp.requires_grad(gamma)) {
                Tensor& gg = tp.grad(gamma);
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t j = 0; j < d; ++j) gg[j] += g[r * d + j] * (*xh)[r * d + j];
            }
            if (tp.requires_grad(beta)) {
                Tensor& gb = tp.grad(beta);
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
            }
            if (tp.requires_grad(x)) {
                Tensor& gx = tp.grad(x);
                double invd = 1.0 / static_cast<double>(d);
                for (std::int64_t r = 0; r < rows; ++r) {
                    double sum_dh = 0.0, sum_dh_h = 0.0;
                    for (std::int64_t j = 0; j < d; ++j) {
                        double dh = g[r * d + j] * gv2[j];
                        sum_dh += dh;
                        sum_dh_h += dh * (*xh)[r * d + j];
                    }
                    double is = (*is_buf)[r];
                    for (std::int64_t j = 0; j < d; ++j) {
                        double dh = g[r * d + j] * gv2[j];
                        gx[r * d + j] += is * (dh - invd * sum_dh - (*xh)[r * d + j] * invd * sum_dh_h);
                    }
                }
            }
        };
    }
    return out;
}

Var softmax_rows(Tape& t, Var x) {
    const Tensor& xv = t.val(x);
    if (xv.rank() != 2) throw ContractViolation("softmax_rows: expects (N,M)");
    std::int64_t rows = xv.dim(0), cols = xv.dim(1);
    Tensor y(xv.shape());
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xs = xv.data() + r * cols;
        double* yd = y.data() + r * cols;
        double mx = xs[0];
        for (std::int64_t j = 1; j < cols; ++j) mx = std::max(mx, xs[j]);
        double z = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            yd[j] = std::exp(xs[j] - mx);
            z += yd[j];
        }
        double iz = 1.0 / z;
        for (std::int64_t j = 0; j < cols; ++j) yd[j] *= iz;
    }
    bool rg = need(t, x);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, out, rows, cols](Tape& tp) {
            const Tensor& g = tp.grad(out);
            const Tensor& yv = tp.val(out);
            Tensor& gx = tp.grad(x);
            for (std::int64_t r = 0; r < rows; ++r) {
                const double* gs = g.data() + r * cols;
                const double* ys = yv.data() + r * cols;
                double dot = 0.0;
                for (std::int64_t j = 0; j < cols; ++j) dot += gs[j] * ys[j];
                double* gd = gx.data() + r * cols;
                for (std::int64_t j = 0; j < cols; ++j) gd[j] += ys[j] * (gs[j] - dot);
            }
        };
    }
    return out;
}

Var row_l2_normalize(Tape& t, Var x, double eps) {
    const Tensor& xv = t.val(x);
    if (xv.rank() != 2) throw ContractViolation("row_l2_normalize: expects (N,D)");
    std::int64_t rows = xv.dim(0), cols = xv.dim(1);
    Tensor y(xv.shape());
    Tensor inv_norm({rows});
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xs = xv.data() + r * cols;
        double s = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) s += xs[j] * xs[j];
        double in = 1.0 / std::sqrt(s + eps);
        inv_norm[r] = in;
        double* yd = y.data() + r * cols;
        for (std::int64_t j = 0; j < cols; ++j) yd[j] = xs[j] * in;
    }
    bool rg = need(t, x);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        auto inv = std::make_shared<Tensor>(std::move(inv_norm));
        t.node_mut(out).backprop = [x, out, rows, cols, inv](Tape& tp) {
            const Tensor& g = tp.grad(out);
            const Tensor& xv2 = tp.val(x);
            Tensor& gx = tp.grad(x);
            for (std::int64_t r = 0; r < rows; ++r) {
                const double* gs = g.data() + r * cols;
                const double* xs = xv2.data() + r * cols;
                double dot = 0.0;
                for (std::int64_t j = 0; j < cols; ++j) dot += gs[j] * xs[j];
                double in = (*inv)[r];
                double in3 = in * in * in;
                double* gd = gx.data() + r * cols;
                for (std::int64_t j = 0; j < cols; ++j) gd[j] += gs[j] * in - xs[j] * dot * in3;
            }
        };
    }
    return out;
}

Var tile_rows_to(Tape& t, Var tokens, std::int64_t total_len) {
    const Tensor& xv = t.val(tokens);
    if (xv.rank() != 2) throw ContractViolation("tile_rows_to: expects (count,d)");
    std::int64_t period = xv.numel();
    if (period == 0 || total_len % period != 0)
        throw ContractViolation("tile_rows_to: total length " + std::to_string(total_len) +
                                " not a multiple of token block " + std::to_string(period));
    Tensor y({total_len});
    const double* xs = xv.data();
    for (std::int64_t p = 0; p < total_len; ++p) y[p] = xs[p % period];
    bool rg = need(t, tokens);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [tokens, out, period, total_len](Tape& tp) {
            const Tensor& g = tp.grad(out);
            Tensor& gt = tp.grad(tokens);
            for (std::int64_t p = 0; p < total_len; ++p) gt[p % period] += g[p];
        };
    }
    return out;
}

Var add_phase_broadcast(Tape& t, Var x, Var p, int sh, int sw) {
    const Tensor& xv = t.val(x);
    const Tensor& pv = t.val(p);
    if (xv.rank() != 3 || pv.rank() != 2 || pv.dim(0) != static_cast<std::int64_t>(sh) * sw ||
        pv.dim(1) != xv.dim(0))
        throw ContractViolation("add_phase_broadcast: shape mismatch");
    std::int64_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Tensor y(xv.shape());
    for (std::int64_t ci = 0; ci < c; ++ci) {
        const double* xs = xv.data() + ci * h * w;
        double* yd = y.data() + ci * h * w;
        for (std::int64_t yy = 0; yy < h; ++yy) {
            std::int64_t ry = (yy % sh) * sw;
            for (std::int64_t xx = 0; xx < w; ++xx) yd[yy * w + xx] = xs[yy * w + xx] + pv.at2(ry + xx % sw, ci);
        }
    }
    bool rg = need(t, x) || need(t, p);
    Var out = make_node(t, std::move(y), rg, {});
    if (rg) {
        t.node_mut(out).backprop = [x, p, out, c, h, w, sh, sw](Tape& tp) {
            const Tensor& g = tp.grad(out);
            if (tp.requires_grad(x)) tp.grad(x).add_scaled(g, 1.0);
            if (tp.requires_grad(p)) {
                Tensor& gp = tp.grad(p);
                for (std::int64_t ci = 0; ci < c; ++ci) {
                    const double* gs = g.data() + ci * h * w;
                    for (std::int64_t yy = 0; yy < h; ++yy) {
                        std::int64_t ry = (yy % sh) * sw;
                        for (std::int64_t xx = 0; xx < w; ++xx) gp.at2(ry + xx % sw, ci) += gs[yy * w + xx];
                    }
                }
            }
        };
    }
    return out;
}

}  // namespace nervkit::ad
