// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/config_io.hpp"

#include <openssl/evp.h>

#include <fstream>

#include "nervkit/bytes.hpp"
#include "nervkit/codec.hpp"

namespace nervkit {

using nlohmann::json;

namespace {

template <typename T>
T enum_from_string(const std::string& s, const std::vector<std::pair<std::string, T>>& table, const char* what) {
    for (const auto& [name, value] : table)
        if (name == s) return value;
    std::string options;
    for (const auto& [name, value] : table) options += (options.empty() ? "" : " | ") + name;
    throw ConfigError(std::string(what) + ": unknown kind '" + s + "' (expected " + options + ")");
}

template <typename T>
std::string enum_to_string(T v, const std::vector<std::pair<std::string, T>>& table) {
    for (const auto& [name, value] : table)
        if (value == v) return name;
    throw ContractViolation("unmapped enum value");
}

const std::vector<std::pair<std::string, EncodingKind>> kEncodingKinds = {
    {"sinusoidal_t", EncodingKind::sinusoidal_t},
    {"sinusoidal_xy_t", EncodingKind::sinusoidal_xy_t},
    {"temporal_grid", EncodingKind::temporal_grid},
};
const std::vector<std::pair<std::string, StemKind>> kStemKinds = {
    {"mlp", StemKind::mlp},
    {"single_fc", StemKind::single_fc},
    {"transformer_xy", StemKind::transformer_xy},
    {"stemless", StemKind::stemless},
};
const std::vector<std::pair<std::string, BlockKind>> kBlockKinds = {
    {"nerv_basic", BlockKind::nerv_basic},
    {"ffnerv_double", BlockKind::ffnerv_double},
    {"bilinear_conv", BlockKind::bilinear_conv},
};
const std::vector<std::pair<std::string, SkipKind>> kSkipKinds = {
    {"none", SkipKind::none},
    {"t_skip", SkipKind::t_skip},
    {"local_grid", SkipKind::local_grid},
};
const std::vector<std::pair<std::string, FuseKind>> kFuseKinds = {
    {"add", FuseKind::add},
    {"affine_modulate", FuseKind::affine_modulate},
};
const std::vector<std::pair<std::string, Activation>> kActivations = {
    {"gelu", Activation::gelu},
    {"relu", Activation::relu},
    {"sine", Activation::sine},
};
const std::vector<std::pair<std::string, NormKind>> kNorms = {
    {"none", NormKind::none},
    {"layer_norm", NormKind::layer_norm},
};
const std::vector<std::pair<std::string, FinalActivation>> kFinalActivations = {
    {"sigmoid", FinalActivation::sigmoid},
    {"tanh_shift", FinalActivation::tanh_shift},
    {"add_half", FinalActivation::add_half},
};

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return j;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

template <typename T>
T field(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key)) throw ConfigError(std::string(ctx) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(ctx) + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace

json model_config_to_json(const ModelConfig& config) {
    const ModelConfig& c = config;
    json j;
    j["name"] = c.name;
    j["target_resolution"] = {c.target_resolution[0], c.target_resolution[1]};
    json enc;
    enc["kind"] = enum_to_string(c.encoding.kind, kEncodingKinds);
    if (c.encoding.kind == EncodingKind::temporal_grid) {
        enc["grid_frames"] = c.encoding.grid_frames;
        enc["grid_shape"] = {c.encoding.grid_shape[0], c.encoding.grid_shape[1], c.encoding.grid_shape[2]};
    } else {
        enc["base"] = c.encoding.base;
        enc["length"] = c.encoding.length;
    }
    j["encoding"] = enc;

    json stem;
    stem["kind"] = enum_to_string(c.stem.kind, kStemKinds);
    if (c.stem.kind != StemKind::stemless)
        stem["out_shape"] = {c.stem.out_shape[0], c.stem.out_shape[1], c.stem.out_shape[2]};
    if (c.stem.kind == StemKind::mlp) stem["hidden_dims"] = c.stem.hidden_dims;
    if (c.stem.kind == StemKind::transformer_xy) {
        stem["xy_length"] = c.stem.xy_length;
        stem["dim"] = c.stem.dim;
        stem["heads"] = c.stem.heads;
    }
    j["stem"] = stem;

    json blocks = json::array();
    for (const BlockSpec& b : c.blocks) {
        json jb;
        jb["kind"] = enum_to_string(b.kind, kBlockKinds);
        jb["stride"] = {b.stride[0], b.stride[1]};
        jb["kernel_size"] = b.kernel_size;
        jb["activation"] = enum_to_string(b.activation, kActivations);
        jb["norm"] = enum_to_string(b.norm, kNorms);
        if (b.in_channels != 0 || b.out_channels != 0) jb["channels"] = {b.in_channels, b.out_channels};
        blocks.push_back(jb);
    }
    j["blocks"] = blocks;

    json skip;
    skip["kind"] = enum_to_string(c.skip.kind, kSkipKinds);
    if (c.skip.kind == SkipKind::t_skip) {
        skip["fuse"] = enum_to_string(c.skip.fuse, kFuseKinds);
        skip["norm_before_fuse"] = c.skip.norm_before_fuse;
        skip["t_base"] = c.skip.t_base;
        skip["t_length"] = c.skip.t_length;
    } else if (c.skip.kind == SkipKind::local_grid) {
        skip["grid_frames"] = c.skip.grid_frames;
        skip["grid_dim"] = c.skip.grid_dim;
    }
    j["skip"] = skip;

    j["head_kernel"] = c.head_kernel;
    j["final_activation"] = enum_to_string(c.final_activation, kFinalActivations);
    j["exp"] = c.expansion;
    j["r"] = c.reduction;
    return j;
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.name = field_or<std::string>(j, "name", "model");
    auto res = field<std::vector<std::int64_t>>(j, "target_resolution", "config");
    if (res.size() != 2) throw ConfigError("config: target_resolution must be [H, W]");
    c.target_resolution = {res[0], res[1]};

    const json& enc = j.contains("encoding") ? j.at("encoding") : throw ConfigError("config: missing 'encoding'");
    c.encoding.kind = enum_from_string(field<std::string>(enc, "kind", "encoding"), kEncodingKinds, "encoding");
    if (c.encoding.kind == EncodingKind::temporal_grid) {
        c.encoding.grid_frames = field<int>(enc, "grid_frames", "encoding");
        auto gs = field<std::vector<std::int64_t>>(enc, "grid_shape", "encoding");
        if (gs.size() != 3) throw ConfigError("encoding: grid_shape must be [fc_h, fc_w, dim]");
        c.encoding.grid_shape = {gs[0], gs[1], gs[2]};
    } else {
        c.encoding.base = field_or<double>(enc, "base", 1.25);
        c.encoding.length = field_or<int>(enc, "length", 80);
    }

    const json& stem = j.contains("stem") ? j.at("stem") : throw ConfigError("config: missing 'stem'");
    c.stem.kind = enum_from_string(field<std::string>(stem, "kind", "stem"), kStemKinds, "stem");
    if (c.stem.kind != StemKind::stemless) {
        auto os = field<std::vector<std::int64_t>>(stem, "out_shape", "stem");
        if (os.size() != 3) throw ConfigError("stem: out_shape must be [fc_h, fc_w, fc_dim]");
        c.stem.out_shape = {os[0], os[1], os[2]};
    }
    if (c.stem.kind == StemKind::mlp)
        c.stem.hidden_dims = field_or<std::vector<std::int64_t>>(stem, "hidden_dims", {});
    if (c.stem.kind == StemKind::transformer_xy) {
        c.stem.xy_length = field_or<int>(stem, "xy_length", 16);
        c.stem.dim = field_or<std::int64_t>(stem, "dim", 64);
        c.stem.heads = field_or<int>(stem, "heads", 4);
    }

    for (const json& jb : field<json>(j, "blocks", "config")) {
        BlockSpec b;
        b.kind = enum_from_string(field<std::string>(jb, "kind", "block"), kBlockKinds, "block");
        auto st = field<std::vector<int>>(jb, "stride", "block");
        if (st.size() != 2) throw ConfigError("block: stride must be [s_h, s_w]");
        b.stride = {st[0], st[1]};
        b.kernel_size = field_or<int>(jb, "kernel_size", 3);
        b.activation = enum_from_string(field_or<std::string>(jb, "activation", "gelu"), kActivations, "block");
        b.norm = enum_from_string(field_or<std::string>(jb, "norm", "none"), kNorms, "block");
        if (jb.contains("channels")) {
            auto ch = jb.at("channels").get<std::vector<std::int64_t>>();
            if (ch.size() != 2) throw ConfigError("block: channels must be [in, out]");
            b.in_channels = ch[0];
            b.out_channels = ch[1];
        }
        c.blocks.push_back(b);
    }

    if (j.contains("skip")) {
        const json& skip = j.at("skip");
        c.skip.kind = enum_from_string(field<std::string>(skip, "kind", "skip"), kSkipKinds, "skip");
        if (c.skip.kind == SkipKind::t_skip) {
            c.skip.fuse = enum_from_string(field_or<std::string>(skip, "fuse", "affine_modulate"), kFuseKinds, "skip");
            c.skip.norm_before_fuse = field_or<bool>(skip, "norm_before_fuse", true);
            c.skip.t_base = field_or<double>(skip, "t_base", 1.25);
            c.skip.t_length = field_or<int>(skip, "t_length", 40);
        } else if (c.skip.kind == SkipKind::local_grid) {
            c.skip.grid_frames = field_or<int>(skip, "grid_frames", 8);
            c.skip.grid_dim = field_or<std::int64_t>(skip, "grid_dim", 8);
        }
    }

    c.head_kernel = field_or<int>(j, "head_kernel", 3);
    c.final_activation =
        enum_from_string(field_or<std::string>(j, "final_activation", "sigmoid"), kFinalActivations, "config");
    c.expansion = field_or<double>(j, "exp", 4.0);
    c.reduction = field_or<double>(j, "r", 2.0);
    c.validate();
    return c;
}

ModelConfig load_model_config(const std::string& path) { return model_config_from_json(load_json(path)); }
void save_model_config(const std::string& path, const ModelConfig& config) {
    save_json(path, model_config_to_json(config));
}

json hyper_config_to_json(const HyperConfig& config) {
    json j;
    j["name"] = config.name;
    j["clip"] = {{"frames", config.hypo.clip_frames},
                 {"resolution", {config.hypo.clip_resolution[0], config.hypo.clip_resolution[1]}}};
    j["patch_size"] = config.patch_size;
    j["backbone"] = {{"dim", config.backbone.dim},
                     {"ff_dim", config.backbone.ff_dim},
                     {"heads", config.backbone.heads},
                     {"blocks", config.backbone.blocks}};
    json hypo;
    hypo["fc_dim"] = config.hypo.fc_dim;
    hypo["pos_dim"] = config.hypo.pos_dim;
    hypo["activation"] = enum_to_string(config.hypo.activation, kActivations);
    json layers = json::array();
    for (const HypoLayerSpec& l : config.hypo.layers) {
        layers.push_back({{"kernel_size", l.kernel_size},
                          {"upscale", {l.upscale[0], l.upscale[1]}},
                          {"tokens_max", l.token_count_max},
                          {"tokens_min", l.token_count_min},
                          {"token_dim", l.token_dim}});
    }
    hypo["layers"] = layers;
    j["hypo"] = hypo;
    j["masking"] = {{"enabled", config.masking}, {"ratio", config.masking_ratio}};
    return j;
}

HyperConfig hyper_config_from_json(const json& j) {
    HyperConfig c;
    c.name = field_or<std::string>(j, "name", "hypernerv");
    const json& clip = j.contains("clip") ? j.at("clip") : throw ConfigError("hyper config: missing 'clip'");
    c.hypo.clip_frames = field<int>(clip, "frames", "clip");
    auto res = field<std::vector<std::int64_t>>(clip, "resolution", "clip");
    if (res.size() != 2) throw ConfigError("clip: resolution must be [H, W]");
    c.hypo.clip_resolution = {res[0], res[1]};
    c.patch_size = field<int>(j, "patch_size", "hyper config");
    const json& bb = j.contains("backbone") ? j.at("backbone") : throw ConfigError("hyper config: missing 'backbone'");
    c.backbone.dim = field<std::int64_t>(bb, "dim", "backbone");
    c.backbone.ff_dim = field<std::int64_t>(bb, "ff_dim", "backbone");
    c.backbone.heads = field<int>(bb, "heads", "backbone");
    c.backbone.blocks = field<int>(bb, "blocks", "backbone");
    const json& hypo = j.contains("hypo") ? j.at("hypo") : throw ConfigError("hyper config: missing 'hypo'");
    c.hypo.fc_dim = field<std::int64_t>(hypo, "fc_dim", "hypo");
    c.hypo.pos_dim = field<std::int64_t>(hypo, "pos_dim", "hypo");
    c.hypo.activation = enum_from_string(field_or<std::string>(hypo, "activation", "gelu"), kActivations, "hypo");
    for (const json& jl : field<json>(hypo, "layers", "hypo")) {
        HypoLayerSpec l;
        l.kernel_size = field<int>(jl, "kernel_size", "hypo layer");
        auto up = field<std::vector<int>>(jl, "upscale", "hypo layer");
        if (up.size() != 2) throw ConfigError("hypo layer: upscale must be [s_h, s_w]");
        l.upscale = {up[0], up[1]};
        l.token_count_max = field_or<std::int64_t>(jl, "tokens_max", 0);
        l.token_count_min = field_or<std::int64_t>(jl, "tokens_min", l.token_count_max);
        l.token_dim = field_or<std::int64_t>(jl, "token_dim", 0);
        c.hypo.layers.push_back(l);
    }
    if (j.contains("masking")) {
        c.masking = field_or<bool>(j.at("masking"), "enabled", false);
        c.masking_ratio = field_or<double>(j.at("masking"), "ratio", 0.5);
    }
    c.validate();
    return c;
}

HyperConfig load_hyper_config(const std::string& path) { return hyper_config_from_json(load_json(path)); }
void save_hyper_config(const std::string& path, const HyperConfig& config) {
    save_json(path, hyper_config_to_json(config));
}

bool is_hyper_config(const json& j) { return j.contains("hypo"); }

std::string sha256_hex(const void* data, std::size_t size) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr))
        throw NumericError("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_bytes(path);
    return sha256_hex(bytes.data(), bytes.size());
}

std::string config_hash(const ModelConfig& config) { return sha256_hex(model_config_to_json(config).dump()); }
std::string config_hash(const HyperConfig& config) { return sha256_hex(hyper_config_to_json(config).dump()); }

namespace {
constexpr char kCheckpointMagic[4] = {'N', 'R', 'V', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_hash, const ParamStore& params) {
    ByteWriter w;
    w.bytes.insert(w.bytes.end(), kCheckpointMagic, kCheckpointMagic + 4);
    w.u32(kCheckpointVersion);
    w.str(config_hash);
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const NamedTensor& item : params.items()) {
        w.str(item.name);
        w.u8(static_cast<std::uint8_t>(item.value.rank()));
        for (std::int64_t d : item.value.shape()) w.u64(static_cast<std::uint64_t>(d));
        for (std::int64_t i = 0; i < item.value.numel(); ++i) w.f64(item.value[i]);
    }
    write_bytes(path, w.bytes);
}

namespace {
ByteReader open_checkpoint(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    auto magic = r.raw(4);
    if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0)
        throw DataError("not a checkpoint file (bad magic)");
    std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    return r;
}
}  // namespace

void load_checkpoint(const std::string& path, const std::string& expected_hash, ParamStore& params) {
    std::vector<std::uint8_t> bytes = read_bytes(path);
    ByteReader r = open_checkpoint(bytes);
    std::string hash = r.str();
    if (!expected_hash.empty() && hash != expected_hash)
        throw DataError("checkpoint " + path + " was written for config " + hash + ", not " + expected_hash);
    std::uint32_t count = r.u32();
    if (count != params.size())
        throw DataError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                        std::to_string(params.size()));
    for (NamedTensor& item : params.items()) {
        std::string name = r.str();
        if (name != item.name) throw DataError("checkpoint tensor '" + name + "' does not match '" + item.name + "'");
        std::uint8_t ndim = r.u8();
        std::vector<std::int64_t> shape(ndim);
        for (std::uint8_t i = 0; i < ndim; ++i) shape[i] = static_cast<std::int64_t>(r.u64());
        if (shape != item.value.shape()) throw DataError("checkpoint tensor '" + name + "' shape mismatch");
        for (std::int64_t i = 0; i < item.value.numel(); ++i) item.value[i] = r.f64();
    }
}

std::string checkpoint_hash(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_bytes(path);
    ByteReader r = open_checkpoint(bytes);
    return r.str();
}

}  // namespace nervkit
