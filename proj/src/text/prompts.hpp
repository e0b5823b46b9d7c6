#pragma once

#include <cstdint>
#include <string>

#include "codec/descriptor.hpp"

namespace umic {

enum class ConpLevel : uint8_t {
    none = 0,
    concise = 1,
    moderate = 2,
    detailed = 3,
};

// word limits: 16 / 36 / 75 for concise / moderate / detailed
int word_limit(ConpLevel level);
const char* conp_level_name(ConpLevel level);
ConpLevel conp_level_from_name(const std::string& name);
ConpLevel conp_level_from_byte(uint8_t b);

int count_words(const std::string& text);  // whitespace-delimited tokens

struct ContentPrompt {
    ConpLevel level = ConpLevel::none;
    std::string text;  // empty iff level == none

    void validate() const;
};

// Truncates to the level's word limit (prefix of words). level must not be
// `none` and the caption must be non-empty.
ContentPrompt truncate_to_level(const std::string& caption, ConpLevel level);

struct CompressionPrompt {
    std::string text;
    CodecDescriptor source;
    ConpLevel conp_level = ConpLevel::none;
};

// "category:<c>|codec:<name>|metric:<m>|quality:<q>|conp:<level>"
CompressionPrompt render_compression_prompt(const CodecDescriptor& d, ConpLevel level);
// exact inverse of render_compression_prompt
std::pair<CodecDescriptor, ConpLevel> parse_compression_prompt(const std::string& text);

}  // namespace umic
