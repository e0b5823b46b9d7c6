#include "text/prompt_codec.hpp"

#include <zlib.h>

#include "core/error.hpp"

namespace umic {

PromptBytes compress_prompt(const std::string& text) {
    require(text.size() <= 65535, ErrKind::invalid_argument,
            "prompt longer than 65535 bytes");
    uLongf bound = compressBound(uLong(text.size()));
    Bytes out(bound);
    int rc = compress2(out.data(), &bound,
                       reinterpret_cast<const Bytef*>(text.data()),
                       uLong(text.size()), Z_BEST_COMPRESSION);
    require(rc == Z_OK, ErrKind::internal, "zlib compress2 failed");
    out.resize(bound);
    PromptBytes pb;
    pb.compressed = std::move(out);
    pb.raw_byte_count = uint32_t(text.size());
    pb.compressed_byte_count = uint32_t(pb.compressed.size());
    return pb;
}

std::string decompress_prompt(const PromptBytes& pb) {
    require(pb.compressed_byte_count == pb.compressed.size(), ErrKind::format,
            "prompt bytes: compressed_byte_count mismatch");
    std::string out(pb.raw_byte_count, '\0');
    uLongf dst_len = pb.raw_byte_count;
    uLong src_len = uLong(pb.compressed.size());
    int rc = uncompress2(reinterpret_cast<Bytef*>(out.data()), &dst_len,
                         pb.compressed.data(), &src_len);
    require(rc == Z_OK, ErrKind::format,
            std::string("prompt stream corrupt: ") +
                (rc == Z_DATA_ERROR ? "checksum/data error" : "decode error"));
    require(dst_len == pb.raw_byte_count && src_len == pb.compressed.size(),
            ErrKind::format, "prompt stream length mismatch");
    return out;
}

Bytes prompt_to_wire(const PromptBytes& pb) {
    require(pb.raw_byte_count <= 65535, ErrKind::invalid_argument,
            "prompt raw length exceeds wire field");
    ByteWriter w;
    w.u16(uint16_t(pb.raw_byte_count));
    w.raw(pb.compressed.data(), pb.compressed.size());
    return std::move(w.out);
}

PromptBytes prompt_from_wire(const Bytes& wire) {
    ByteReader r(wire);
    PromptBytes pb;
    pb.raw_byte_count = r.u16("prompt raw length");
    pb.compressed = r.raw(r.remaining(), "prompt stream");
    require(!pb.compressed.empty(), ErrKind::format, "empty prompt stream");
    pb.compressed_byte_count = uint32_t(pb.compressed.size());
    return pb;
}

}  // namespace umic
