#include "text/prompts.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace umic {

int word_limit(ConpLevel level) {
    switch (level) {
        case ConpLevel::none: return 0;
        case ConpLevel::concise: return 16;
        case ConpLevel::moderate: return 36;
        case ConpLevel::detailed: return 75;
    }
    fail(ErrKind::invalid_argument, "bad conp level");
}

const char* conp_level_name(ConpLevel level) {
    switch (level) {
        case ConpLevel::none: return "none";
        case ConpLevel::concise: return "concise";
        case ConpLevel::moderate: return "moderate";
        case ConpLevel::detailed: return "detailed";
    }
    fail(ErrKind::invalid_argument, "bad conp level");
}

ConpLevel conp_level_from_name(const std::string& name) {
    if (name == "none") return ConpLevel::none;
    if (name == "concise") return ConpLevel::concise;
    if (name == "moderate") return ConpLevel::moderate;
    if (name == "detailed") return ConpLevel::detailed;
    fail(ErrKind::invalid_argument, "unknown conp level: " + name);
}

ConpLevel conp_level_from_byte(uint8_t b) {
    require(b <= 3, ErrKind::format, "conp level byte out of range");
    return ConpLevel(b);
}

int count_words(const std::string& text) {
    int n = 0;
    bool in_word = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

void ContentPrompt::validate() const {
    if (level == ConpLevel::none) {
        require(text.empty(), ErrKind::invalid_argument,
                "content prompt with level=none must be empty");
        return;
    }
    require(!text.empty(), ErrKind::invalid_argument,
            "content prompt text empty at non-none level");
    require(count_words(text) <= word_limit(level), ErrKind::invalid_argument,
            "content prompt exceeds word limit");
}

ContentPrompt truncate_to_level(const std::string& caption, ConpLevel level) {
    require(level != ConpLevel::none, ErrKind::invalid_argument,
            "truncate_to_level: use level=none for no prompt");
    require(count_words(caption) > 0, ErrKind::invalid_argument,
            "truncate_to_level: empty caption");
    int limit = word_limit(level);
    ContentPrompt p;
    p.level = level;
    int words = 0;
    bool in_word = false;
    size_t end = caption.size();
    for (size_t i = 0; i < caption.size(); ++i) {
        char c = caption[i];
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) {
            ++words;
            if (words > limit) {
                end = i;
                break;
            }
        }
        in_word = !ws;
    }
    std::string text = caption.substr(0, end);
    // strip trailing whitespace
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                             text.back() == '\n' || text.back() == '\r'))
        text.pop_back();
    p.text = text;
    p.validate();
    return p;
}

CompressionPrompt render_compression_prompt(const CodecDescriptor& d, ConpLevel level) {
    d.validate();
    std::ostringstream os;
    os << "category:" << codec_category_name(d.category) << "|codec:" << d.name
       << "|metric:" << opt_metric_name(d.metric)
       << "|quality:" << CodecDescriptor::format_quality(d.quality)
       << "|conp:" << conp_level_name(level);
    CompressionPrompt p;
    p.text = os.str();
    p.source = d;
    p.conp_level = level;
    return p;
}

std::pair<CodecDescriptor, ConpLevel> parse_compression_prompt(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> fields;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, '|')) {
        size_t colon = cur.find(':');
        require(colon != std::string::npos, ErrKind::format,
                "compression prompt field missing ':' in \"" + cur + "\"");
        fields.emplace_back(cur.substr(0, colon), cur.substr(colon + 1));
    }
    require(fields.size() == 5, ErrKind::format,
            "compression prompt must have 5 fields");
    static const char* expect[] = {"category", "codec", "metric", "quality", "conp"};
    for (size_t i = 0; i < 5; ++i)
        require(fields[i].first == expect[i], ErrKind::format,
                "compression prompt field order: expected " + std::string(expect[i]));

    CodecDescriptor d;
    d.category = codec_category_from_name(fields[0].second);
    d.name = fields[1].second;
    d.metric = opt_metric_from_name(fields[2].second);
    char* endp = nullptr;
    d.quality = std::strtod(fields[3].second.c_str(), &endp);
    require(endp && *endp == '\0' && !fields[3].second.empty(), ErrKind::format,
            "bad quality in compression prompt: " + fields[3].second);
    d.quality = CodecDescriptor::canonical_quality(d.quality);
    d.validate();
    ConpLevel level = conp_level_from_name(fields[4].second);
    return {d, level};
}

}  // namespace umic
