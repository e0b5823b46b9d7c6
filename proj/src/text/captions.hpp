#pragma once

#include <map>
#include <string>
#include <vector>

#include "text/prompts.hpp"

namespace umic {

struct CaptionSet {
    std::string concise;
    std::string moderate;
    std::string detailed;

    const std::string& for_level(ConpLevel level) const;
};

// Captions produced offline by a vision-language model and shipped as a
// sidecar file: a JSON array of {id, concise, moderate, detailed} records.
class CaptionStore {
public:
    static CaptionStore from_file(const std::string& path);
    static CaptionStore from_json_text(const std::string& text);

    const CaptionSet& lookup(const std::string& image_id) const;
    bool contains(const std::string& image_id) const;
    size_t count() const { return captions_.size(); }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::map<std::string, CaptionSet> captions_;
    std::vector<std::string> warnings_;
};

}  // namespace umic
