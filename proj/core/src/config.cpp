#include "fastconv/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fastconv {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return true;
}

[[noreturn]] void fail_line(const std::string& origin, int line, const std::string& what) {
    throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

ConfigMap ConfigMap::parse_text(const std::string& text, const std::string& origin) {
    ConfigMap cfg;
    cfg.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            fail_line(origin, lineno, "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!valid_key(key))
            fail_line(origin, lineno, "invalid key '" + key + "'");
        if (value.empty())
            fail_line(origin, lineno, "empty value for key '" + key + "'");
        auto [it, inserted] = cfg.entries_.emplace(key, Entry{value, lineno, false});
        if (!inserted)
            fail_line(origin, lineno,
                      "duplicate key '" + key + "' (first set on line " +
                          std::to_string(it->second.line) + ")");
    }
    return cfg;
}

ConfigMap ConfigMap::parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_text(buf.str(), path.string());
}

const ConfigMap::Entry* ConfigMap::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

const ConfigMap::Entry& ConfigMap::require(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw std::invalid_argument(origin_ + ": missing required key '" + key + "'");
    return *e;
}

bool ConfigMap::has(const std::string& key) const { return find(key) != nullptr; }

void ConfigMap::fail_at(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    fail_line(origin_, line, what + " (key '" + key + "')");
}

namespace {

double parse_double_or(const ConfigMap& cfg, const std::string& key, const std::string& raw) {
    std::istringstream is(raw);
    double v;
    char extra;
    if (!(is >> v) || (is >> extra)) cfg.fail_at(key, "expected a real number, got '" + raw + "'");
    return v;
}

}  // namespace

double ConfigMap::require_double(const std::string& key) const {
    return parse_double_or(*this, key, require(key).value);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    return e ? parse_double_or(*this, key, e->value) : fallback;
}

long long ConfigMap::require_int(const std::string& key) const {
    const std::string& raw = require(key).value;
    std::istringstream is(raw);
    long long v;
    char extra;
    if (!(is >> v) || (is >> extra)) fail_at(key, "expected an integer, got '" + raw + "'");
    return v;
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
    return find(key) ? require_int(key) : fallback;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail_at(key, "expected true or false, got '" + e->value + "'");
}

std::string ConfigMap::require_string(const std::string& key) const { return require(key).value; }

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

std::vector<double> ConfigMap::require_list(const std::string& key) const {
    const std::string& raw = require(key).value;
    std::istringstream is(raw);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof()) fail_at(key, "expected a list of reals, got '" + raw + "'");
    if (out.empty()) fail_at(key, "empty list");
    return out;
}

std::vector<double> ConfigMap::get_list(const std::string& key, std::vector<double> fallback) const {
    return entries_.count(key) ? require_list(key) : std::move(fallback);
}

void ConfigMap::forbid_unknown() const {
    for (const auto& [key, entry] : entries_)
        if (!entry.used)
            fail_line(origin_, entry.line, "unknown key '" + key + "'");
}

std::vector<std::string> ConfigMap::keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [key, entry] : entries_) out.push_back(key);
    return out;
}

}  // namespace fastconv
