#pragma once

#include <cstdint>
#include <string>

namespace umic {

enum class CodecCategory : uint8_t { traditional = 0, neural = 1 };
enum class OptMetric : uint8_t { psnr = 0, ms_ssim = 1, gan = 2 };

const char* codec_category_name(CodecCategory c);
CodecCategory codec_category_from_name(const std::string& s);
const char* opt_metric_name(OptMetric m);
OptMetric opt_metric_from_name(const std::string& s);

// Identity and compression syntax of one basic-codec operating point.
// (name, quality) identifies a registered entry; quality is stored on a
// 1e-4 grid so the container's fixed-point field round-trips exactly.
struct CodecDescriptor {
    CodecCategory category = CodecCategory::traditional;
    std::string name;
    OptMetric metric = OptMetric::psnr;
    double quality = 0.0;

    static double canonical_quality(double q);
    static std::string format_quality(double q);  // up to 6 significant digits

    uint32_t quality_code() const;
    void validate() const;

    bool same_point(const CodecDescriptor& o) const {
        return name == o.name && quality_code() == o.quality_code();
    }
};

}  // namespace umic
