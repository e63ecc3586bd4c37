// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nervkit {

namespace {
std::int64_t compute_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 0) throw ContractViolation("negative tensor dimension");
        n *= d;
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
    numel_ = compute_numel(shape_);
    data_.assign(static_cast<std::size_t>(numel_), 0.0);
}

Tensor::Tensor(std::vector<std::int64_t> shape, double fill) : Tensor(std::move(shape)) {
    std::fill(data_.begin(), data_.end(), fill);
}

Tensor Tensor::from_data(std::vector<std::int64_t> shape, std::vector<double> data) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.numel_ = compute_numel(t.shape_);
    if (static_cast<std::int64_t>(data.size()) != t.numel_)
        throw ContractViolation("from_data: element count does not match shape");
    t.data_ = std::move(data);
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << ")";
    return os.str();
}

Tensor Tensor::reshaped(std::vector<std::int64_t> new_shape) const {
    if (compute_numel(new_shape) != numel_)
        throw ContractViolation("reshape: element count mismatch " + shape_str());
    Tensor t = *this;
    t.shape_ = std::move(new_shape);
    return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_scaled(const Tensor& other, double scale) {
    if (!same_shape(other)) throw ContractViolation("add_scaled: shape mismatch");
    const double* o = other.data();
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * o[i];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::min() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::min(m, v);
    return m;
}

double Tensor::max() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::max(m, v);
    return m;
}

double Tensor::abs_max() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

void Tensor::fill_uniform(Rng& rng, double lo, double hi) {
    for (double& v : data_) v = rng.uniform(lo, hi);
}

void Tensor::fill_normal(Rng& rng, double mean, double stddev) {
    for (double& v : data_) v = rng.normal(mean, stddev);
}

// The i-k-j loop keeps the inner accumulation independent per output column,
// which vectorizes well and is bitwise reproducible for any build.
void gemm_nn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::int64_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::int64_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::int64_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = c + i * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace nervkit
