// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// Model compression pipeline: symmetric k-bit quantization, a static-model
// byte-oriented arithmetic (range) coder, the "NRVB" bitstream container,
// bits-per-pixel accounting and RD-curve assembly.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nervkit/components.hpp"

namespace nervkit {

struct QuantizedTensor {
    std::vector<std::int32_t> symbols;  // in [-2^(k-1), 2^(k-1)-1]
    std::vector<std::int64_t> shape;
    double scale = 0.0;  // dequantized value = symbol * scale; 0 for all-zero tensors
    int bits = 8;
};

/// Symmetric per-tensor quantization, scale = max|w| / (2^(k-1)-1), with
/// round-half-to-even. bits must be in {4..8}.
QuantizedTensor quantize(const Tensor& tensor, int bits);
Tensor dequantize(const QuantizedTensor& q);

/// Normalized symbol frequencies (16-bit precision) over the full k-bit
/// alphabet; every symbol present in the data keeps a nonzero slot.
struct FrequencyTable {
    int bits = 8;
    std::vector<std::uint16_t> freq;  // size 2^bits, indexed by symbol + 2^(k-1)
    std::uint32_t total = 0;

    static FrequencyTable build(const std::vector<std::int32_t>& symbols, int bits);
    std::int32_t min_symbol() const { return -(1 << (bits - 1)); }
};

/// Static-model arithmetic coding. decode(encode(x)) == x bit-exactly; the
/// table must give nonzero mass to every encoded symbol.
std::vector<std::uint8_t> entropy_encode(const std::vector<std::int32_t>& symbols, const FrequencyTable& table);
std::vector<std::int32_t> entropy_decode(const std::vector<std::uint8_t>& bytes, const FrequencyTable& table,
                                         std::size_t count);

/// Self-contained compressed-model container (magic "NRVB", version 1;
/// little-endian, length-prefixed fields).
struct Bitstream {
    std::string config_hash;
    int bits = 8;
    struct TensorRecord {
        std::string name;
        std::vector<std::int64_t> shape;
        double scale = 0.0;
        FrequencyTable table;
        std::vector<std::uint8_t> payload;
        std::uint64_t symbol_count = 0;
    };
    std::vector<TensorRecord> tensors;

    std::vector<std::uint8_t> serialize() const;
    static Bitstream deserialize(const std::vector<std::uint8_t>& bytes);

    std::size_t byte_size() const { return serialize().size(); }
};

/// Quantize and entropy-code every parameter tensor of the model.
Bitstream compress_model(const Model& model, const std::string& config_hash, int bits);

/// Rebuild a model from config + bitstream. The config's hash must match the
/// one recorded in the stream.
Model decompress_model(const Bitstream& stream, const ModelConfig& config, const std::string& config_hash);

/// Apply quantize/dequantize at the given width to all parameters in place.
void quantize_model_params(Model& model, int bits);

double bpp(double total_bits, std::int64_t frames, std::int64_t height, std::int64_t width);

struct RDPoint {
    double bpp = 0.0;
    double quality = 0.0;
    std::string label;
};

/// Sort by bpp and keep only strictly-ascending quality, per the reporting
/// rule: a larger size that does worse than a smaller one is dropped.
std::vector<RDPoint> rd_curve(std::vector<RDPoint> points);

// file helpers
void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::string& path);

}  // namespace nervkit
