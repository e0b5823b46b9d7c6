#include "core/bytes.hpp"

#include <cstdio>

namespace umic {

Bytes read_file_bytes(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    require(f != nullptr, ErrKind::io, "cannot open for reading: " + path);
    std::fseek(f, 0, SEEK_END);
    long sz = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    Bytes data(sz > 0 ? size_t(sz) : 0);
    if (sz > 0 && std::fread(data.data(), 1, size_t(sz), f) != size_t(sz)) {
        std::fclose(f);
        fail(ErrKind::io, "short read: " + path);
    }
    std::fclose(f);
    return data;
}

void write_file_bytes(const std::string& path, const Bytes& data) {
    FILE* f = std::fopen(path.c_str(), "wb");
    require(f != nullptr, ErrKind::io, "cannot open for writing: " + path);
    if (!data.empty() && std::fwrite(data.data(), 1, data.size(), f) != data.size()) {
        std::fclose(f);
        fail(ErrKind::io, "short write: " + path);
    }
    std::fclose(f);
}

std::string read_file_text(const std::string& path) {
    Bytes b = read_file_bytes(path);
    return std::string(b.begin(), b.end());
}

void write_file_text(const std::string& path, const std::string& text) {
    Bytes b(text.begin(), text.end());
    write_file_bytes(path, b);
}

}  // namespace umic
