// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "nervkit/common.hpp"

namespace nervkit {

/// Little-endian, length-prefixed byte packing shared by the file containers.
struct ByteWriter {
    std::vector<std::uint8_t> bytes;
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        if (s.size() > 0xFFFF) throw ContractViolation("byte writer: string too long");
        u16(static_cast<std::uint16_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void raw(const std::vector<std::uint8_t>& v) { bytes.insert(bytes.end(), v.begin(), v.end()); }
};

struct ByteReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;
    explicit ByteReader(const std::vector<std::uint8_t>& b) : bytes(b) {}
    void need(std::size_t n) const {
        if (pos + n > bytes.size())
            throw DataError("byte reader: truncated input (wanted " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos) + ")");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        std::uint16_t n = u16();
        need(n);
        std::string s(bytes.begin() + pos, bytes.begin() + pos + n);
        pos += n;
        return s;
    }
    std::vector<std::uint8_t> raw(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> v(bytes.begin() + pos, bytes.begin() + pos + n);
        pos += n;
        return v;
    }
};

}  // namespace nervkit
