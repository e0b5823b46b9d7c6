#include "core/sha256.hpp"

#include <openssl/sha.h>

namespace umic {

std::string sha256_hex(const void* data, size_t n) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(static_cast<const unsigned char*>(data), n, digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (unsigned char b : digest) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

std::string sha256_hex(const std::vector<uint8_t>& data) {
    return sha256_hex(data.data(), data.size());
}

std::string sha256_hex(const std::string& data) {
    return sha256_hex(data.data(), data.size());
}

}  // namespace umic
