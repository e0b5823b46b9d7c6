#include "codec/descriptor.hpp"

#include <cmath>
#include <cstdio>

#include "core/error.hpp"

namespace umic {

const char* codec_category_name(CodecCategory c) {
    return c == CodecCategory::traditional ? "traditional" : "neural";
}

CodecCategory codec_category_from_name(const std::string& s) {
    if (s == "traditional") return CodecCategory::traditional;
    if (s == "neural") return CodecCategory::neural;
    fail(ErrKind::invalid_argument, "unknown codec category: " + s);
}

const char* opt_metric_name(OptMetric m) {
    switch (m) {
        case OptMetric::psnr: return "PSNR";
        case OptMetric::ms_ssim: return "MS-SSIM";
        case OptMetric::gan: return "GAN";
    }
    fail(ErrKind::invalid_argument, "bad metric");
}

OptMetric opt_metric_from_name(const std::string& s) {
    if (s == "PSNR") return OptMetric::psnr;
    if (s == "MS-SSIM") return OptMetric::ms_ssim;
    if (s == "GAN") return OptMetric::gan;
    fail(ErrKind::invalid_argument, "unknown optimization metric: " + s);
}

double CodecDescriptor::canonical_quality(double q) {
    require(std::isfinite(q) && q > 0.0, ErrKind::invalid_argument,
            "quality indicator must be positive and finite");
    double code = std::llround(q * 1e4);
    require(code >= 1.0 && code <= 4294967295.0, ErrKind::invalid_argument,
            "quality indicator outside fixed-point range [0.0001, 429496]");
    return code / 1e4;
}

std::string CodecDescriptor::format_quality(double q) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", canonical_quality(q));
    return buf;
}

uint32_t CodecDescriptor::quality_code() const {
    return uint32_t(std::llround(canonical_quality(quality) * 1e4));
}

void CodecDescriptor::validate() const {
    require(!name.empty(), ErrKind::invalid_argument, "codec name empty");
    for (char c : name)
        require(c != '|' && c != ':' && c != '\n' && c != ' ',
                ErrKind::invalid_argument,
                "codec name must not contain '|', ':', spaces or newlines");
    require(category != CodecCategory::traditional || metric == OptMetric::psnr,
            ErrKind::invalid_argument,
            "traditional codecs always carry optimization metric PSNR");
    canonical_quality(quality);  // throws when out of range
}

}  // namespace umic
