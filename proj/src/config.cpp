#include "tailrank/config.hpp"

#include <json.hpp>

using nlohmann::json;

namespace tailrank {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

// Numbers, booleans, quoted strings and arrays are JSON already; anything
// else is taken as a bare string.
std::string normalize_value(const std::string& raw, const std::string& key) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("empty value for key \"" + key + "\"");
    json parsed = json::parse(v, nullptr, false);
    if (!parsed.is_discarded()) return parsed.dump();
    return json(v).dump();
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    try {
        return from_string(read_file(path));
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

RunConfig RunConfig::from_string(const std::string& text) {
    RunConfig cfg;
    std::string section;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string line = text.substr(start, nl == std::string::npos ? nl : nl - start);
        start = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        cfg.raw_[full] = normalize_value(line.substr(eq + 1), full);
    }
    return cfg;
}

void RunConfig::apply_override(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like section.key=value: " + spec);
    const std::string key = trim(spec.substr(0, eq));
    if (key.empty()) throw ConfigError("empty override key: " + spec);
    raw_[key] = normalize_value(spec.substr(eq + 1), key);
}

bool RunConfig::has(const std::string& key) const { return raw_.count(key) > 0; }

namespace {
json fetch(const std::map<std::string, std::string>& raw, const std::string& key) {
    auto it = raw.find(key);
    if (it == raw.end()) throw ConfigError("missing config key \"" + key + "\"");
    return json::parse(it->second);
}
}  // namespace

std::string RunConfig::get_string(const std::string& key) const {
    json v = fetch(raw_, key);
    if (!v.is_string()) throw ConfigError("config key \"" + key + "\" is not a string");
    return v.get<std::string>();
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double RunConfig::get_double(const std::string& key) const {
    json v = fetch(raw_, key);
    if (!v.is_number()) throw ConfigError("config key \"" + key + "\" is not a number");
    return v.get<double>();
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int64_t RunConfig::get_int(const std::string& key) const {
    json v = fetch(raw_, key);
    if (!v.is_number_integer()) throw ConfigError("config key \"" + key + "\" is not an integer");
    return v.get<int64_t>();
}

int64_t RunConfig::get_int(const std::string& key, int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    json v = fetch(raw_, key);
    if (!v.is_boolean()) throw ConfigError("config key \"" + key + "\" is not a boolean");
    return v.get<bool>();
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
    json v = fetch(raw_, key);
    if (!v.is_array()) throw ConfigError("config key \"" + key + "\" is not an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw ConfigError("config key \"" + key + "\" has a non-numeric element");
        out.push_back(e.get<double>());
    }
    if (out.empty()) throw ConfigError("config key \"" + key + "\" is an empty array");
    return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
    return has(key) ? get_double_list(key) : fallback;
}

uint64_t RunConfig::seed() const {
    if (!has("seed")) throw ConfigError("config is missing the mandatory \"seed\" key");
    const int64_t s = get_int("seed");
    if (s < 0) throw ConfigError("seed must be non-negative");
    return static_cast<uint64_t>(s);
}

void RunConfig::set_seed(uint64_t s) { raw_["seed"] = std::to_string(s); }

uint64_t RunConfig::content_hash() const {
    std::string canon;
    for (const auto& [k, v] : raw_) {
        canon += k;
        canon.push_back('=');
        canon += v;
        canon.push_back('\n');
    }
    return fnv1a64(canon);
}

}  // namespace tailrank
