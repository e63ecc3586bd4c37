// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "nervkit/autodiff.hpp"
#include "nervkit/rng.hpp"
#include "nervkit/tensor.hpp"

namespace nervkit {

struct NamedTensor {
    std::string name;
    Tensor value;
};

/// Ordered collection of named learnable tensors. Declaration order is the
/// serialization and entropy-coding order, so it must stay stable.
class ParamStore {
public:
    Tensor& add(const std::string& name, std::vector<std::int64_t> shape);
    /// Fan-in uniform init for a linear/conv weight plus matching bias.
    void add_linear(const std::string& prefix, std::int64_t out, std::int64_t in, Rng& rng);
    /// Conv weight (cout, cin_per_group, kh, kw) + bias, fan-in uniform.
    void add_conv(const std::string& prefix, std::int64_t cout, std::int64_t cin_g, int kh, int kw, Rng& rng);
    /// LayerNorm gain/shift initialized to 1/0.
    void add_norm(const std::string& prefix, std::int64_t dim);

    bool has(const std::string& name) const { return index_.count(name) > 0; }
    std::size_t index_of(const std::string& name) const;
    Tensor& get(const std::string& name) { return items_[index_of(name)].value; }
    const Tensor& get(const std::string& name) const { return items_[index_of(name)].value; }

    std::vector<NamedTensor>& items() { return items_; }
    const std::vector<NamedTensor>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }

    std::int64_t total_elements() const;

private:
    std::vector<NamedTensor> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Tape leaves for every tensor of a store, aligned by index.
struct BoundParams {
    const ParamStore* store = nullptr;
    std::vector<ad::Var> vars;

    ad::Var operator[](const std::string& name) const { return vars[store->index_of(name)]; }
    ad::Var by_index(std::size_t i) const { return vars[i]; }
};

BoundParams bind_params(ad::Tape& tape, const ParamStore& store, bool trainable);

}  // namespace nervkit
