#pragma once

#include <string>

#include "core/bytes.hpp"

namespace umic {

// Losslessly coded prompt text. `compressed` is a zlib (RFC 1950) stream:
// a DEFLATE body plus the adler32 checksum, so corruption is detected
// instead of silently decoding to wrong text.
struct PromptBytes {
    Bytes compressed;
    uint32_t raw_byte_count = 0;
    uint32_t compressed_byte_count = 0;
};

PromptBytes compress_prompt(const std::string& text);
std::string decompress_prompt(const PromptBytes& pb);

// Wire layout: 2-byte big-endian raw length, then the compressed stream.
Bytes prompt_to_wire(const PromptBytes& pb);
PromptBytes prompt_from_wire(const Bytes& wire);

}  // namespace umic
