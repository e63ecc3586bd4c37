// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Config file schema (JSON with explicit `kind` discriminators), stable
// content digests, and the checkpoint container.

#pragma once

#include <json.hpp>

#include "nervkit/components.hpp"
#include "nervkit/hypernerv.hpp"

namespace nervkit {

// ---- model configs ----
nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
ModelConfig load_model_config(const std::string& path);
void save_model_config(const std::string& path, const ModelConfig& config);

// ---- hyper-network configs ----
nlohmann::json hyper_config_to_json(const HyperConfig& config);
HyperConfig hyper_config_from_json(const nlohmann::json& j);
HyperConfig load_hyper_config(const std::string& path);
void save_hyper_config(const std::string& path, const HyperConfig& config);

/// True when the file holds a hyper-network config (has a "hypo" object).
bool is_hyper_config(const nlohmann::json& j);

/// SHA-256 hex digests.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::string& path);

/// Stable content digest of a config: SHA-256 of the normalized JSON dump.
std::string config_hash(const ModelConfig& config);
std::string config_hash(const HyperConfig& config);

// ---- checkpoints ("NRVC": parameters + config hash) ----
void save_checkpoint(const std::string& path, const std::string& config_hash, const ParamStore& params);
/// Loads into an existing store; names/shapes must match. Pass an empty
/// expected hash to skip the check.
void load_checkpoint(const std::string& path, const std::string& expected_hash, ParamStore& params);
std::string checkpoint_hash(const std::string& path);  // config hash recorded in the file

}  // namespace nervkit
