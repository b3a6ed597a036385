#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailrank/common.hpp"

namespace tailrank {

// Flat TOML-style run configuration: [section] headers, key = value lines,
// '#' comments. Values: numbers, booleans, "quoted strings", bare words,
// arrays of numbers or strings. Keys are addressed as "section.key".
class RunConfig {
public:
    static RunConfig from_file(const std::string& path);
    static RunConfig from_string(const std::string& text);

    // "section.key=value" with the same value grammar as the file.
    void apply_override(const std::string& spec);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    // Seed is mandatory for every run.
    uint64_t seed() const;
    void set_seed(uint64_t s);

    // Content hash of the effective (post-override) configuration.
    uint64_t content_hash() const;

private:
    std::map<std::string, std::string> raw_;  // key -> serialized JSON value
};

}  // namespace tailrank
