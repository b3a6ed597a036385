#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tailrank {

// Malformed input files, records violating type invariants.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad run configuration (missing keys, out-of-range values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite objectives, impossible events and similar numeric failures.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// FNV-1a over raw bytes; used for content hashes in run manifests.
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::string hex64(uint64_t v);

}  // namespace tailrank
