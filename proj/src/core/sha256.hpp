#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace umic {

std::string sha256_hex(const void* data, size_t n);
std::string sha256_hex(const std::vector<uint8_t>& data);
std::string sha256_hex(const std::string& data);

}  // namespace umic
