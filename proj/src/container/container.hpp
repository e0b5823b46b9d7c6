#pragma once

#include "core/bytes.hpp"
#include "text/prompts.hpp"

namespace umic {

// On-disk layout: a fixed 20-byte header, the visual payload, then the
// prompt section (absent at conp level none). All fields big-endian.
//
//   offset size field
//   0      4    magic "UMIC"
//   4      1    version (1)
//   5      2    codec_id (registry index)
//   7      4    quality_code (quality * 10^4, unsigned)
//   11     1    conp_level (0..3)
//   12     2    image_height
//   14     2    image_width
//   16     4    visual_length
//
// The prompt section runs to the end of the stream; its length is implied
// by the total size (see docs/container.md).
inline constexpr size_t kContainerHeaderSize = 20;
inline constexpr uint8_t kContainerVersion = 1;

struct ContainerHeader {
    uint16_t codec_id = 0;
    uint32_t quality_code = 0;
    ConpLevel conp_level = ConpLevel::none;
    uint16_t image_height = 0;
    uint16_t image_width = 0;
    uint32_t visual_length = 0;

    bool operator==(const ContainerHeader&) const = default;
};

struct UniMICStream {
    ContainerHeader header;
    Bytes visual;
    Bytes prompt;  // wire-format prompt bytes; empty iff conp_level == none

    uint32_t prompt_length() const { return uint32_t(prompt.size()); }
    bool operator==(const UniMICStream&) const = default;
};

Bytes pack(const UniMICStream& stream);
UniMICStream unpack(const Bytes& bytes);

struct BppBreakdown {
    double total = 0.0;
    double header = 0.0;
    double visual = 0.0;
    double prompt = 0.0;
};

// bpp = 8 * (20 + visual_length + prompt_length) / (height * width)
double compute_bpp(const UniMICStream& stream);
BppBreakdown compute_bpp_breakdown(const UniMICStream& stream);

}  // namespace umic
