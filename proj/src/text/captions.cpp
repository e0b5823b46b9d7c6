#include "text/captions.hpp"

#include <cstdio>

#include "core/bytes.hpp"
#include "core/error.hpp"
#include "json.hpp"

namespace umic {

const std::string& CaptionSet::for_level(ConpLevel level) const {
    switch (level) {
        case ConpLevel::concise: return concise;
        case ConpLevel::moderate: return moderate;
        case ConpLevel::detailed: return detailed;
        default: fail(ErrKind::invalid_argument, "no caption for conp level none");
    }
}

CaptionStore CaptionStore::from_file(const std::string& path) {
    return from_json_text(read_file_text(path));
}

CaptionStore CaptionStore::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrKind::format, std::string("caption sidecar is not valid JSON: ") + e.what());
    }
    require(j.is_array(), ErrKind::format, "caption sidecar must be a JSON array");

    CaptionStore store;
    for (const auto& rec : j) {
        require(rec.is_object() && rec.contains("id"), ErrKind::format,
                "caption record missing id");
        std::string id = rec.at("id").get<std::string>();
        require(!store.captions_.count(id), ErrKind::format,
                "duplicate caption id: " + id);
        CaptionSet set;
        auto take = [&](const char* field, ConpLevel level) {
            require(rec.contains(field), ErrKind::format,
                    "caption record " + id + " missing field " + field);
            std::string text = rec.at(field).get<std::string>();
            require(count_words(text) > 0, ErrKind::format,
                    "caption record " + id + " has empty " + field + " caption");
            int limit = word_limit(level);
            if (count_words(text) > limit) {
                store.warnings_.push_back("caption " + id + "." + field +
                                          " exceeds " + std::to_string(limit) +
                                          " words, truncated");
                text = truncate_to_level(text, level).text;
            }
            return text;
        };
        set.concise = take("concise", ConpLevel::concise);
        set.moderate = take("moderate", ConpLevel::moderate);
        set.detailed = take("detailed", ConpLevel::detailed);
        store.captions_[id] = std::move(set);
    }
    for (const auto& w : store.warnings_) std::fprintf(stderr, "warning: %s\n", w.c_str());
    return store;
}

const CaptionSet& CaptionStore::lookup(const std::string& image_id) const {
    auto it = captions_.find(image_id);
    require(it != captions_.end(), ErrKind::not_found,
            "no caption entry for image id: " + image_id);
    return it->second;
}

bool CaptionStore::contains(const std::string& image_id) const {
    return captions_.count(image_id) != 0;
}

}  // namespace umic
