#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fastconv {

/// Flat dotted-key configuration text: one `key = value` per line, `#`
/// starts a comment, keys are [A-Za-z0-9_.]. Values are scalars or
/// whitespace-separated lists. Every lookup marks the key as consumed so a
/// final forbid_unknown() can reject misspelled keys by name and line.
class ConfigMap {
public:
    static ConfigMap parse_file(const std::filesystem::path& path);
    static ConfigMap parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;

    double require_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long require_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string require_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> require_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

    /// Throws if any entry was never consumed, naming the first such key.
    void forbid_unknown() const;

    /// "origin:line: <what> (key '<key>')" in an invalid_argument.
    [[noreturn]] void fail_at(const std::string& key, const std::string& what) const;

    const std::string& origin() const { return origin_; }
    std::vector<std::string> keys() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };

    std::map<std::string, Entry> entries_;
    std::string origin_;

    const Entry* find(const std::string& key) const;
    const Entry& require(const std::string& key) const;
};

}  // namespace fastconv
