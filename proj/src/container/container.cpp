#include "container/container.hpp"

namespace umic {

static void validate_stream(const UniMICStream& s) {
    require(s.header.image_height >= 1 && s.header.image_width >= 1,
            ErrKind::invalid_argument, "container: zero image dimension");
    require(s.header.visual_length == s.visual.size(), ErrKind::invalid_argument,
            "container: visual_length field inconsistent with payload");
    if (s.header.conp_level == ConpLevel::none)
        require(s.prompt.empty(), ErrKind::invalid_argument,
                "container: prompt present at conp level none");
    else
        require(s.prompt.size() >= 3, ErrKind::invalid_argument,
                "container: missing prompt section at non-none conp level");
}

Bytes pack(const UniMICStream& s) {
    validate_stream(s);
    ByteWriter w;
    w.str("UMIC");
    w.u8(kContainerVersion);
    w.u16(s.header.codec_id);
    w.u32(s.header.quality_code);
    w.u8(uint8_t(s.header.conp_level));
    w.u16(s.header.image_height);
    w.u16(s.header.image_width);
    w.u32(s.header.visual_length);
    require(w.out.size() == kContainerHeaderSize, ErrKind::internal,
            "container header must be exactly 20 bytes");
    w.raw(s.visual.data(), s.visual.size());
    w.raw(s.prompt.data(), s.prompt.size());
    return std::move(w.out);
}

UniMICStream unpack(const Bytes& bytes) {
    require(bytes.size() >= kContainerHeaderSize, ErrKind::format,
            "container: truncated header");
    require(bytes[0] == 'U' && bytes[1] == 'M' && bytes[2] == 'I' && bytes[3] == 'C',
            ErrKind::format, "container: bad magic");
    ByteReader r(bytes);
    r.pos = 4;
    uint8_t version = r.u8("version");
    require(version == kContainerVersion, ErrKind::format,
            "container: unsupported version " + std::to_string(version));
    UniMICStream s;
    s.header.codec_id = r.u16("codec_id");
    s.header.quality_code = r.u32("quality_code");
    s.header.conp_level = conp_level_from_byte(r.u8("conp_level"));
    s.header.image_height = r.u16("image_height");
    s.header.image_width = r.u16("image_width");
    s.header.visual_length = r.u32("visual_length");
    require(r.remaining() >= s.header.visual_length, ErrKind::format,
            "container: truncated visual section");
    s.visual = r.raw(s.header.visual_length, "visual section");
    s.prompt = r.raw(r.remaining(), "prompt section");
    validate_stream(s);
    return s;
}

BppBreakdown compute_bpp_breakdown(const UniMICStream& s) {
    require(s.header.image_height >= 1 && s.header.image_width >= 1,
            ErrKind::invalid_argument, "bpp: zero-area image");
    double pixels = double(s.header.image_height) * double(s.header.image_width);
    BppBreakdown b;
    b.header = 8.0 * double(kContainerHeaderSize) / pixels;
    b.visual = 8.0 * double(s.header.visual_length) / pixels;
    b.prompt = 8.0 * double(s.prompt.size()) / pixels;
    b.total = 8.0 *
              (double(kContainerHeaderSize) + double(s.header.visual_length) +
               double(s.prompt.size())) /
              pixels;
    return b;
}

double compute_bpp(const UniMICStream& s) { return compute_bpp_breakdown(s).total; }

}  // namespace umic
