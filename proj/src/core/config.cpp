#include "core/config.hpp"

#include <cstdlib>
#include <sstream>

#include "core/bytes.hpp"
#include "core/error.hpp"
#include "core/sha256.hpp"

namespace umic {

static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Config Config::from_file(const std::string& path) {
    return from_text(read_file_text(path));
}

Config Config::from_text(const std::string& text) {
    Config c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        require(eq != std::string::npos, ErrKind::invalid_argument,
                "config line " + std::to_string(lineno) + " is not key=value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        require(!key.empty(), ErrKind::invalid_argument,
                "config line " + std::to_string(lineno) + " has empty key");
        c.kv_[key] = val;
    }
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_str(const std::string& key) const {
    auto it = kv_.find(key);
    require(it != kv_.end(), ErrKind::invalid_argument, "missing config key: " + key);
    return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
}

int64_t Config::get_int(const std::string& key) const {
    const std::string v = get_str(key);
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    require(end && *end == '\0' && !v.empty(), ErrKind::invalid_argument,
            "config key " + key + " is not an integer: " + v);
    return x;
}

int64_t Config::get_int(const std::string& key, int64_t dflt) const {
    return has(key) ? get_int(key) : dflt;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_str(key);
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    require(end && *end == '\0' && !v.empty(), ErrKind::invalid_argument,
            "config key " + key + " is not a number: " + v);
    return x;
}

double Config::get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    std::string v = get_str(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    fail(ErrKind::invalid_argument, "config key " + key + " is not a boolean: " + v);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::string v = get_str(key);
    std::string cur;
    for (char ch : v) {
        if (ch == ',') {
            cur = trim(cur);
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string Config::canonical_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << "=" << v << "\n";
    return os.str();
}

std::string Config::hash() const { return sha256_hex(canonical_text()); }

}  // namespace umic
