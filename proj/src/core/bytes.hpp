#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace umic {

using Bytes = std::vector<uint8_t>;

// Big-endian serialization helpers shared by the container and checkpoint
// formats.
struct ByteWriter {
    Bytes out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(uint8_t(v >> 8));
        out.push_back(uint8_t(v));
    }
    void u32(uint32_t v) {
        out.push_back(uint8_t(v >> 24));
        out.push_back(uint8_t(v >> 16));
        out.push_back(uint8_t(v >> 8));
        out.push_back(uint8_t(v));
    }
    void u64(uint64_t v) {
        u32(uint32_t(v >> 32));
        u32(uint32_t(v));
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void raw(const void* p, size_t n) {
        const uint8_t* b = static_cast<const uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    void str(const std::string& s) { raw(s.data(), s.size()); }
};

struct ByteReader {
    const uint8_t* p;
    size_t n;
    size_t pos = 0;

    ByteReader(const uint8_t* data, size_t size) : p(data), n(size) {}
    explicit ByteReader(const Bytes& b) : p(b.data()), n(b.size()) {}

    size_t remaining() const { return n - pos; }

    void need(size_t k, const char* what) {
        require(remaining() >= k, ErrKind::format,
                std::string("truncated input while reading ") + what);
    }
    uint8_t u8(const char* what = "u8") {
        need(1, what);
        return p[pos++];
    }
    uint16_t u16(const char* what = "u16") {
        need(2, what);
        uint16_t v = uint16_t(p[pos]) << 8 | p[pos + 1];
        pos += 2;
        return v;
    }
    uint32_t u32(const char* what = "u32") {
        need(4, what);
        uint32_t v = uint32_t(p[pos]) << 24 | uint32_t(p[pos + 1]) << 16 |
                     uint32_t(p[pos + 2]) << 8 | uint32_t(p[pos + 3]);
        pos += 4;
        return v;
    }
    uint64_t u64(const char* what = "u64") {
        uint64_t hi = u32(what);
        return hi << 32 | u32(what);
    }
    double f64(const char* what = "f64") {
        uint64_t bits = u64(what);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    Bytes raw(size_t k, const char* what = "bytes") {
        need(k, what);
        Bytes b(p + pos, p + pos + k);
        pos += k;
        return b;
    }
    std::string str(size_t k, const char* what = "string") {
        need(k, what);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
};

Bytes read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const Bytes& data);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

}  // namespace umic
