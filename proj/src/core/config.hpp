#pragma once

#include <map>
#include <string>
#include <vector>

namespace umic {

// Flat key=value configuration. '#' starts a comment, blank lines ignored.
// Later assignments win, which lets CLI flags be layered on top of a file.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_str(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& dflt) const;
    int64_t get_int(const std::string& key) const;
    int64_t get_int(const std::string& key, int64_t dflt) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;

    // comma separated list
    std::vector<std::string> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::string canonical_text() const;   // sorted key=value lines
    std::string hash() const;             // sha256 of canonical text

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace umic
