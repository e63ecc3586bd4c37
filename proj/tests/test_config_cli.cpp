// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "nervkit/config_io.hpp"
#include "nervkit/presets.hpp"

using namespace nervkit;
namespace fs = std::filesystem;

TEST_CASE("model config json round trip is a fixed point") {
    for (const std::string& name : preset_model_names()) {
        CAPTURE(name);
        ModelConfig c = preset_model_config(name, {64, 128}, 6);
        nlohmann::json j1 = model_config_to_json(c);
        ModelConfig parsed = model_config_from_json(j1);
        nlohmann::json j2 = model_config_to_json(parsed);
        CHECK(j1.dump() == j2.dump());
        CHECK(config_hash(c) == config_hash(parsed));
    }
}

TEST_CASE("hyper config json round trip is a fixed point") {
    for (const std::string& name : preset_hyper_names()) {
        CAPTURE(name);
        HyperConfig c = preset_hyper_config(name);
        nlohmann::json j1 = hyper_config_to_json(c);
        HyperConfig parsed = hyper_config_from_json(j1);
        nlohmann::json j2 = hyper_config_to_json(parsed);
        CHECK(j1.dump() == j2.dump());
        CHECK(config_hash(c) == config_hash(parsed));
        CHECK(is_hyper_config(j1));
    }
    CHECK(!is_hyper_config(model_config_to_json(preset_model_config("nerv", {64, 128}))));
}

TEST_CASE("schema violations carry field-precise messages") {
    nlohmann::json j = model_config_to_json(preset_model_config("nerv", {64, 128}));
    j["encoding"]["kind"] = "fourier";
    CHECK_THROWS_WITH_AS(model_config_from_json(j), doctest::Contains("fourier"), ConfigError);

    nlohmann::json missing = j;
    missing.erase("target_resolution");
    CHECK_THROWS_WITH_AS(model_config_from_json(missing), doctest::Contains("target_resolution"), ConfigError);

    nlohmann::json badblock = model_config_to_json(preset_model_config("nerv", {64, 128}));
    badblock["blocks"][0].erase("stride");
    CHECK_THROWS_WITH_AS(model_config_from_json(badblock), doctest::Contains("stride"), ConfigError);
}

TEST_CASE("config hashes are content digests") {
    ModelConfig a = preset_model_config("nerv", {64, 128});
    ModelConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.reduction = 1.4;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 64);  // sha-256 hex

    CHECK(sha256_hex(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("checkpoint round trip") {
    fs::path dir = fs::temp_directory_path() / "nervkit_ckpt_test";
    fs::create_directories(dir);
    std::string path = (dir / "m.nrvc").string();

    ModelConfig cfg = preset_model_config("ffnerv", {16, 16}, 3);
    Model m(cfg, 5);
    std::string hash = config_hash(cfg);
    save_checkpoint(path, hash, m.params());
    CHECK(checkpoint_hash(path) == hash);

    Model restored(cfg, 99);  // different init, then overwritten by the load
    load_checkpoint(path, hash, restored.params());
    auto& ia = m.params().items();
    auto& ib = restored.params().items();
    for (std::size_t i = 0; i < ia.size(); ++i) CHECK(ia[i].value.vec() == ib[i].value.vec());

    CHECK_THROWS_AS(load_checkpoint(path, "0000", restored.params()), DataError);

    ModelConfig other = preset_model_config("nerv", {16, 16});
    Model wrong(other, 0);
    CHECK_THROWS_AS(load_checkpoint(path, "", wrong.params()), DataError);

    fs::remove_all(dir);
}
