// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include "nervkit/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nervkit/bytes.hpp"
#include "nervkit/common.hpp"

namespace nervkit {

namespace {
constexpr char kMagic[4] = {'N', 'R', 'V', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kTopValue = 1u << 24;

void check_bits(int bits) {
    if (bits < 4 || bits > 8) throw ConfigError("quantization bits must be in {4..8}");
}
}  // namespace

QuantizedTensor quantize(const Tensor& tensor, int bits) {
    check_bits(bits);
    if (!tensor.all_finite()) throw ContractViolation("quantize: tensor has non-finite values");
    QuantizedTensor q;
    q.bits = bits;
    q.shape = tensor.shape();
    q.symbols.resize(static_cast<std::size_t>(tensor.numel()));
    const double absmax = tensor.abs_max();
    const std::int32_t qmax = (1 << (bits - 1)) - 1;
    if (absmax == 0.0) {
        q.scale = 0.0;  // all-zero tensor round-trips losslessly
        return q;
    }
    q.scale = absmax / static_cast<double>(qmax);
    const double inv = 1.0 / q.scale;
    for (std::int64_t i = 0; i < tensor.numel(); ++i) {
        // nearbyint under the default FP environment rounds half to even.
        double s = std::nearbyint(tensor[i] * inv);
        q.symbols[i] = static_cast<std::int32_t>(std::clamp<double>(s, -qmax, qmax));
    }
    return q;
}

Tensor dequantize(const QuantizedTensor& q) {
    Tensor out(q.shape);
    for (std::size_t i = 0; i < q.symbols.size(); ++i) out[static_cast<std::int64_t>(i)] = q.symbols[i] * q.scale;
    return out;
}

FrequencyTable FrequencyTable::build(const std::vector<std::int32_t>& symbols, int bits) {
    check_bits(bits);
    FrequencyTable t;
    t.bits = bits;
    const std::size_t slots = 1u << bits;
    t.freq.assign(slots, 0);
    std::vector<std::uint64_t> counts(slots, 0);
    const std::int32_t lo = -(1 << (bits - 1));
    for (std::int32_t s : symbols) {
        std::int64_t idx = static_cast<std::int64_t>(s) - lo;
        if (idx < 0 || idx >= static_cast<std::int64_t>(slots))
            throw ContractViolation("frequency table: symbol " + std::to_string(s) + " outside " +
                                    std::to_string(bits) + "-bit range");
        ++counts[static_cast<std::size_t>(idx)];
    }
    const std::uint64_t n = symbols.size();
    std::uint32_t total = 0;
    if (n == 0) return t;
    if (n <= 0xFFFF) {
        for (std::size_t i = 0; i < slots; ++i) {
            t.freq[i] = static_cast<std::uint16_t>(counts[i]);
            total += t.freq[i];
        }
    } else {
        for (std::size_t i = 0; i < slots; ++i) {
            if (counts[i] == 0) continue;
            std::uint64_t scaled = counts[i] * 0xFFFFull / n;
            t.freq[i] = static_cast<std::uint16_t>(std::max<std::uint64_t>(1, scaled));
            total += t.freq[i];
        }
    }
    t.total = total;
    return t;
}

namespace {

struct RangeEncoder {
    std::vector<std::uint8_t>& out;
    std::uint64_t low = 0;
    std::uint32_t range = 0xFFFFFFFFu;
    std::uint8_t cache = 0;
    std::uint64_t cache_size = 1;

    explicit RangeEncoder(std::vector<std::uint8_t>& sink) : out(sink) {}

    void shift_low() {
        if (static_cast<std::uint32_t>(low) < 0xFF000000u || (low >> 32) != 0) {
            std::uint8_t carry = static_cast<std::uint8_t>(low >> 32);
            std::uint8_t byte = cache;
            do {
                out.push_back(static_cast<std::uint8_t>(byte + carry));
                byte = 0xFF;
            } while (--cache_size != 0);
            cache = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low) >> 24);
        }
        ++cache_size;
        low = static_cast<std::uint64_t>(static_cast<std::uint32_t>(low) << 8);
    }

    void encode(std::uint32_t cum_lo, std::uint32_t freq, std::uint32_t total) {
        range /= total;
        low += static_cast<std::uint64_t>(cum_lo) * range;
        range *= freq;
        while (range < kTopValue) {
            shift_low();
            range <<= 8;
        }
    }

    void flush() {
        for (int i = 0; i < 5; ++i) shift_low();
    }
};

struct RangeDecoder {
    const std::vector<std::uint8_t>& in;
    std::size_t pos = 0;
    std::uint32_t range = 0xFFFFFFFFu;
    std::uint32_t code = 0;

    explicit RangeDecoder(const std::vector<std::uint8_t>& src) : in(src) {
        for (int i = 0; i < 5; ++i) code = (code << 8) | next();
    }

    std::uint8_t next() { return pos < in.size() ? in[pos++] : 0; }

    std::uint32_t decode_target(std::uint32_t total) {
        range /= total;
        std::uint32_t v = code / range;
        return std::min(v, total - 1);
    }

    void consume(std::uint32_t cum_lo, std::uint32_t freq) {
        code -= cum_lo * range;
        range *= freq;
        while (range < kTopValue) {
            code = (code << 8) | next();
            range <<= 8;
        }
    }
};

std::vector<std::uint32_t> cumulative(const FrequencyTable& table) {
    std::vector<std::uint32_t> cum(table.freq.size() + 1, 0);
    for (std::size_t i = 0; i < table.freq.size(); ++i) cum[i + 1] = cum[i] + table.freq[i];
    return cum;
}

}  // namespace

std::vector<std::uint8_t> entropy_encode(const std::vector<std::int32_t>& symbols, const FrequencyTable& table) {
    std::vector<std::uint8_t> out;
    if (symbols.empty()) return out;
    if (table.total == 0) throw ContractViolation("entropy_encode: empty frequency table");
    std::vector<std::uint32_t> cum = cumulative(table);
    const std::int32_t lo = table.min_symbol();
    RangeEncoder enc(out);
    for (std::int32_t s : symbols) {
        std::int64_t idx = static_cast<std::int64_t>(s) - lo;
        if (idx < 0 || idx >= static_cast<std::int64_t>(table.freq.size()) || table.freq[idx] == 0)
            throw ContractViolation("entropy_encode: symbol " + std::to_string(s) +
                                    " has no mass in the frequency table");
        enc.encode(cum[idx], table.freq[idx], table.total);
    }
    enc.flush();
    return out;
}

std::vector<std::int32_t> entropy_decode(const std::vector<std::uint8_t>& bytes, const FrequencyTable& table,
                                         std::size_t count) {
    std::vector<std::int32_t> out;
    if (count == 0) return out;
    if (table.total == 0) throw ContractViolation("entropy_decode: empty frequency table");
    std::vector<std::uint32_t> cum = cumulative(table);
    const std::int32_t lo = table.min_symbol();
    RangeDecoder dec(bytes);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t target = dec.decode_target(table.total);
        // Find the slot with cum[idx] <= target < cum[idx+1].
        std::size_t idx = static_cast<std::size_t>(
            std::upper_bound(cum.begin(), cum.end(), target) - cum.begin() - 1);
        dec.consume(cum[idx], table.freq[idx]);
        out.push_back(static_cast<std::int32_t>(idx) + lo);
    }
    return out;
}

// ---------------------------------------------------------------------------
// bitstream container


std::vector<std::uint8_t> Bitstream::serialize() const {
    ByteWriter w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
    w.u32(kVersion);
    w.str(config_hash);
    w.u8(static_cast<std::uint8_t>(bits));
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const TensorRecord& r : tensors) {
        w.str(r.name);
        w.u8(static_cast<std::uint8_t>(r.shape.size()));
        for (std::int64_t d : r.shape) w.u64(static_cast<std::uint64_t>(d));
        w.f64(r.scale);
        w.u32(static_cast<std::uint32_t>(r.table.freq.size()));
        for (std::uint16_t f : r.table.freq) w.u16(f);
        w.u64(r.symbol_count);
        w.u64(r.payload.size());
        w.raw(r.payload);
    }
    return std::move(w.bytes);
}

Bitstream Bitstream::deserialize(const std::vector<std::uint8_t>& bytes) {
    ByteReader rd(bytes);
    auto magic = rd.raw(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DataError("bitstream: bad magic (not an NRVB stream)");
    std::uint32_t version = rd.u32();
    if (version != kVersion) throw DataError("bitstream: unsupported version " + std::to_string(version));
    Bitstream s;
    s.config_hash = rd.str();
    s.bits = rd.u8();
    std::uint32_t count = rd.u32();
    s.tensors.resize(count);
    for (TensorRecord& r : s.tensors) {
        r.name = rd.str();
        std::uint8_t ndim = rd.u8();
        r.shape.resize(ndim);
        for (std::uint8_t i = 0; i < ndim; ++i) r.shape[i] = static_cast<std::int64_t>(rd.u64());
        r.scale = rd.f64();
        std::uint32_t slots = rd.u32();
        r.table.bits = s.bits;
        r.table.freq.resize(slots);
        std::uint32_t total = 0;
        for (std::uint32_t i = 0; i < slots; ++i) {
            r.table.freq[i] = rd.u16();
            total += r.table.freq[i];
        }
        r.table.total = total;
        r.symbol_count = rd.u64();
        std::uint64_t plen = rd.u64();
        r.payload = rd.raw(plen);
    }
    return s;
}

Bitstream compress_model(const Model& model, const std::string& config_hash, int bits) {
    check_bits(bits);
    Bitstream s;
    s.config_hash = config_hash;
    s.bits = bits;
    for (const NamedTensor& item : model.params().items()) {
        QuantizedTensor q = quantize(item.value, bits);
        Bitstream::TensorRecord r;
        r.name = item.name;
        r.shape = q.shape;
        r.scale = q.scale;
        r.table = FrequencyTable::build(q.symbols, bits);
        r.symbol_count = q.symbols.size();
        r.payload = entropy_encode(q.symbols, r.table);
        s.tensors.push_back(std::move(r));
    }
    return s;
}

Model decompress_model(const Bitstream& stream, const ModelConfig& config, const std::string& config_hash) {
    if (stream.config_hash != config_hash)
        throw DataError("bitstream config hash " + stream.config_hash + " does not match supplied config " +
                        config_hash);
    Model model(config, /*seed=*/0);
    auto& items = model.params().items();
    if (items.size() != stream.tensors.size())
        throw DataError("bitstream holds " + std::to_string(stream.tensors.size()) + " tensors but the config builds " +
                        std::to_string(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Bitstream::TensorRecord& r = stream.tensors[i];
        if (r.name != items[i].name)
            throw DataError("bitstream tensor '" + r.name + "' does not match expected '" + items[i].name + "'");
        if (r.shape != items[i].value.shape())
            throw DataError("bitstream tensor '" + r.name + "' shape mismatch");
        QuantizedTensor q;
        q.bits = stream.bits;
        q.scale = r.scale;
        q.shape = r.shape;
        q.symbols = entropy_decode(r.payload, r.table, r.symbol_count);
        items[i].value = dequantize(q);
    }
    return model;
}

void quantize_model_params(Model& model, int bits) {
    for (NamedTensor& item : model.params().items()) item.value = dequantize(quantize(item.value, bits));
}

double bpp(double total_bits, std::int64_t frames, std::int64_t height, std::int64_t width) {
    if (total_bits <= 0 || frames < 1 || height < 1 || width < 1)
        throw ContractViolation("bpp: all quantities must be positive");
    return total_bits / (static_cast<double>(frames) * height * width);
}

std::vector<RDPoint> rd_curve(std::vector<RDPoint> points) {
    std::stable_sort(points.begin(), points.end(), [](const RDPoint& a, const RDPoint& b) {
        if (a.bpp != b.bpp) return a.bpp < b.bpp;
        return a.quality > b.quality;
    });
    std::vector<RDPoint> out;
    for (const RDPoint& p : points) {
        if (!out.empty() && (p.quality <= out.back().quality || p.bpp <= out.back().bpp)) continue;
        out.push_back(p);
    }
    return out;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed: " + path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw DataError("cannot open: " + path);
    std::streamsize n = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) throw DataError("read failed: " + path);
    return bytes;
}

}  // namespace nervkit
