// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/params.hpp"

#include <cmath>

#include "nervkit/common.hpp"

namespace nervkit {

Tensor& ParamStore::add(const std::string& name, std::vector<std::int64_t> shape) {
    if (index_.count(name)) throw ContractViolation("duplicate parameter name: " + name);
    index_[name] = items_.size();
    items_.push_back({name, Tensor(std::move(shape))});
    return items_.back().value;
}

void ParamStore::add_linear(const std::string& prefix, std::int64_t out, std::int64_t in, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    add(prefix + ".weight", {out, in}).fill_uniform(rng, -bound, bound);
    add(prefix + ".bias", {out}).fill_uniform(rng, -bound, bound);
}

void ParamStore::add_conv(const std::string& prefix, std::int64_t cout, std::int64_t cin_g, int kh, int kw, Rng& rng) {
    double fan_in = static_cast<double>(cin_g * kh * kw);
    double bound = 1.0 / std::sqrt(fan_in);
    add(prefix + ".weight", {cout, cin_g, kh, kw}).fill_uniform(rng, -bound, bound);
    add(prefix + ".bias", {cout}).fill_uniform(rng, -bound, bound);
}

void ParamStore::add_norm(const std::string& prefix, std::int64_t dim) {
    add(prefix + ".gamma", {dim}).fill(1.0);
    add(prefix + ".beta", {dim});
}

std::size_t ParamStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractViolation("unknown parameter: " + name);
    return it->second;
}

std::int64_t ParamStore::total_elements() const {
    std::int64_t n = 0;
    for (const auto& item : items_) n += item.value.numel();
    return n;
}

BoundParams bind_params(ad::Tape& tape, const ParamStore& store, bool trainable) {
    BoundParams b;
    b.store = &store;
    b.vars.reserve(store.size());
    for (const auto& item : store.items()) b.vars.push_back(tape.leaf(item.value, trainable));
    return b;
}

}  // namespace nervkit
