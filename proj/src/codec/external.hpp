#pragma once

#include <string>
#include <vector>

#include "codec/registry.hpp"

namespace umic {

// One stanza of a codec manifest: how to drive an external codec binary.
// Command templates take {in}, {out} and {q} placeholders; pixels cross the
// process boundary as PNG files.
struct ExternalCodecSpec {
    std::string name;
    CodecCategory category = CodecCategory::traditional;
    OptMetric metric = OptMetric::psnr;
    std::string encode_command;
    std::string decode_command;
    std::vector<double> qualities;
};

std::vector<ExternalCodecSpec> parse_codec_manifest(const std::string& text);

class ExternalCodec : public BasicCodec {
public:
    explicit ExternalCodec(ExternalCodecSpec spec, std::string work_dir);

    std::pair<Bytes, ImageBuffer> encode(const ImageBuffer& image,
                                         const CodecDescriptor& d) override;
    ImageBuffer decode(const Bytes& payload, const CodecDescriptor& d) override;

private:
    ExternalCodecSpec spec_;
    std::string work_dir_;
    uint64_t counter_ = 0;
};

// Parses the manifest file and registers every (codec, quality) stanza point.
void register_manifest_codecs(CodecRegistry& reg, const std::string& manifest_path,
                              const std::string& work_dir);

}  // namespace umic
