// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "nervkit/common.hpp"
#include "nervkit/rng.hpp"

namespace nervkit {

/// Dense row-major double tensor. All model math runs in 64-bit so analytic
/// gradients can be validated against central differences directly.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> shape);
    Tensor(std::vector<std::int64_t> shape, double fill);

    static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape), 0.0); }
    static Tensor full(std::vector<std::int64_t> shape, double v) { return Tensor(std::move(shape), v); }
    static Tensor from_data(std::vector<std::int64_t> shape, std::vector<double> data);

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const { return shape_.size(); }
    std::int64_t numel() const { return numel_; }
    bool empty() const { return numel_ == 0; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    // Rank-specific accessors; no bounds checks in release builds.
    double& at2(std::int64_t i, std::int64_t j) { return data_[static_cast<std::size_t>(i * shape_[1] + j)]; }
    double at2(std::int64_t i, std::int64_t j) const { return data_[static_cast<std::size_t>(i * shape_[1] + j)]; }
    double& at3(std::int64_t c, std::int64_t y, std::int64_t x) {
        return data_[static_cast<std::size_t>((c * shape_[1] + y) * shape_[2] + x)];
    }
    double at3(std::int64_t c, std::int64_t y, std::int64_t x) const {
        return data_[static_cast<std::size_t>((c * shape_[1] + y) * shape_[2] + x)];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    std::string shape_str() const;

    /// Metadata-only reshape; element count must be preserved.
    Tensor reshaped(std::vector<std::int64_t> new_shape) const;

    void fill(double v);
    void add_scaled(const Tensor& other, double scale);  // *this += scale * other

    bool all_finite() const;

    double min() const;
    double max() const;
    double abs_max() const;
    double sum() const;

    void fill_uniform(Rng& rng, double lo, double hi);
    void fill_normal(Rng& rng, double mean, double stddev);

private:
    std::vector<std::int64_t> shape_;
    std::vector<double> data_;
    std::int64_t numel_ = 0;
};

/// C(M,N) += A(M,K) * B(K,N); row-major, deterministic loop order.
void gemm_nn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n);
/// C(M,N) += A(M,K) * B(N,K)^T
void gemm_nt(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n);
/// C(M,N) += A(K,M)^T * B(K,N)
void gemm_tn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n);

}  // namespace nervkit
