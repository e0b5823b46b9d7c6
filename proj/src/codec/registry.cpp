#include "codec/registry.hpp"

#include <algorithm>
#include <cmath>

#include "codec/toy_dct.hpp"

namespace umic {

uint16_t CodecRegistry::register_codec(const CodecDescriptor& d,
                                       std::shared_ptr<BasicCodec> impl) {
    d.validate();
    require(impl != nullptr, ErrKind::invalid_argument, "codec impl is null");
    require(entries_.size() < 65535, ErrKind::invalid_argument, "registry full");
    for (const Entry& e : entries_)
        require(!e.descriptor.same_point(d), ErrKind::duplicate,
                "codec already registered: " + d.name + " @ " +
                    CodecDescriptor::format_quality(d.quality));
    entries_.push_back({d, std::move(impl)});
    return uint16_t(entries_.size() - 1);
}

const CodecDescriptor& CodecRegistry::descriptor(uint16_t id) const {
    require(id < entries_.size(), ErrKind::not_found,
            "codec id " + std::to_string(id) + " not registered");
    return entries_[id].descriptor;
}

bool CodecRegistry::contains(const std::string& name, double quality) const {
    uint32_t code = uint32_t(std::llround(CodecDescriptor::canonical_quality(quality) * 1e4));
    for (const Entry& e : entries_)
        if (e.descriptor.name == name && e.descriptor.quality_code() == code) return true;
    return false;
}

uint16_t CodecRegistry::find(const std::string& name, double quality) const {
    uint32_t code = uint32_t(std::llround(CodecDescriptor::canonical_quality(quality) * 1e4));
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].descriptor.name == name &&
            entries_[i].descriptor.quality_code() == code)
            return uint16_t(i);
    fail(ErrKind::not_found, "codec not registered: " + name + " @ " +
                                 CodecDescriptor::format_quality(quality));
}

std::vector<CodecDescriptor> CodecRegistry::list_codecs() const {
    std::vector<CodecDescriptor> out;
    for (const Entry& e : entries_) out.push_back(e.descriptor);
    return out;
}

std::vector<uint16_t> CodecRegistry::points_for(const std::string& name) const {
    std::vector<uint16_t> ids;
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].descriptor.name == name) ids.push_back(uint16_t(i));
    std::sort(ids.begin(), ids.end(), [this](uint16_t a, uint16_t b) {
        return entries_[a].descriptor.quality < entries_[b].descriptor.quality;
    });
    return ids;
}

EncodeResult CodecRegistry::encode_visual(const ImageBuffer& image, uint16_t id) const {
    const Entry& e = entries_.at(id);
    image.validate("encode_visual input");
    auto [bytes, decoded] = e.impl->encode(image, e.descriptor);
    require(!bytes.empty(), ErrKind::codec, "codec produced empty payload");
    require(decoded.height == image.height && decoded.width == image.width,
            ErrKind::codec, "codec changed image dimensions");
    EncodeResult r;
    r.payload = VisualPayload::from_bytes(std::move(bytes));
    r.decoded = std::move(decoded);
    return r;
}

ImageBuffer CodecRegistry::decode_visual(const VisualPayload& payload,
                                         uint16_t id) const {
    const Entry& e = entries_.at(id);
    require(payload.byte_count == payload.bytes.size(), ErrKind::invalid_argument,
            "visual payload byte_count mismatch");
    return e.impl->decode(payload.bytes, e.descriptor);
}

void register_builtin_codecs(CodecRegistry& reg) {
    auto dct = std::make_shared<ToyDctCodec>();
    for (double qf : {5.0, 20.0, 50.0, 95.0}) {
        CodecDescriptor d;
        d.category = CodecCategory::traditional;
        d.name = "toy-dct";
        d.metric = OptMetric::psnr;
        d.quality = qf;
        reg.register_codec(d, dct);
    }
}

}  // namespace umic
