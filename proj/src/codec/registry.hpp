#pragma once

#include <memory>
#include <vector>

#include "codec/descriptor.hpp"
#include "core/bytes.hpp"
#include "core/image.hpp"

namespace umic {

struct VisualPayload {
    Bytes bytes;
    uint32_t byte_count = 0;

    static VisualPayload from_bytes(Bytes b) {
        VisualPayload p;
        p.byte_count = uint32_t(b.size());
        p.bytes = std::move(b);
        return p;
    }
};

// Port implemented by every basic codec. encode() returns the bitstream and
// the decoded image in one call since the decoded image x_v feeds the
// compensator on both sides.
class BasicCodec {
public:
    virtual ~BasicCodec() = default;
    virtual std::pair<Bytes, ImageBuffer> encode(const ImageBuffer& image,
                                                 const CodecDescriptor& d) = 0;
    virtual ImageBuffer decode(const Bytes& payload, const CodecDescriptor& d) = 0;
};

struct EncodeResult {
    VisualPayload payload;
    ImageBuffer decoded;
};

// Write-once-then-read-only collection of basic-codec operating points.
// The registration index is the codec_id carried by the container header,
// so registration order must match between encoder and decoder.
class CodecRegistry {
public:
    uint16_t register_codec(const CodecDescriptor& d, std::shared_ptr<BasicCodec> impl);

    size_t count() const { return entries_.size(); }
    const CodecDescriptor& descriptor(uint16_t id) const;
    bool contains(const std::string& name, double quality) const;
    uint16_t find(const std::string& name, double quality) const;
    std::vector<CodecDescriptor> list_codecs() const;
    // ids of all operating points of one codec, sorted by quality
    std::vector<uint16_t> points_for(const std::string& name) const;

    EncodeResult encode_visual(const ImageBuffer& image, uint16_t id) const;
    ImageBuffer decode_visual(const VisualPayload& payload, uint16_t id) const;

private:
    struct Entry {
        CodecDescriptor descriptor;
        std::shared_ptr<BasicCodec> impl;
    };
    std::vector<Entry> entries_;
};

// Built-in toy codecs: the block-DCT codec at QF {5, 20, 50, 95}.
void register_builtin_codecs(CodecRegistry& reg);

}  // namespace umic
