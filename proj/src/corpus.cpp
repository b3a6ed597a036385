#include "tailrank/corpus.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace tailrank {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed: " + path);
}

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

Query make_query(const std::string& raw) {
    Query q;
    q.id = raw;
    q.raw = raw;
    q.tokens = tokenize(raw);
    return q;
}

static std::vector<std::string> split_segments(const std::string& abstract_text) {
    // Boundaries: '.' (covers "..." as a run) and the UTF-8 ellipsis U+2026.
    std::vector<std::string> segments;
    std::string cur;
    const std::string ellipsis = "\xe2\x80\xa6";
    for (std::size_t i = 0; i < abstract_text.size();) {
        if (abstract_text[i] == '.') {
            segments.push_back(cur);
            cur.clear();
            ++i;
        } else if (abstract_text.compare(i, ellipsis.size(), ellipsis) == 0) {
            segments.push_back(cur);
            cur.clear();
            i += ellipsis.size();
        } else {
            cur.push_back(abstract_text[i]);
            ++i;
        }
    }
    segments.push_back(cur);
    std::vector<std::string> out;
    for (auto& s : segments) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        std::size_t e = s.find_last_not_of(" \t\r\n");
        out.push_back(s.substr(b, e - b + 1));
    }
    return out;
}

Snippet make_snippet(const std::string& url, const std::string& title,
                     const std::string& abstract_text) {
    Snippet s;
    s.url = url;
    s.title = title;
    s.abstract_text = abstract_text;
    s.title_tokens = tokenize(title);
    s.abstract_tokens = tokenize(abstract_text);
    s.url_tokens = tokenize(url);
    s.segments = split_segments(abstract_text);
    return s;
}

namespace {

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSON record");
    return j;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        fn(line, lineno);
    }
}

[[noreturn]] void bad_record(const std::string& path, std::size_t lineno, const std::string& msg) {
    throw DataError(path + ":" + std::to_string(lineno) + ": " + msg);
}

}  // namespace

std::vector<Session> load_sessions(const std::string& path, std::size_t max_results) {
    std::vector<Session> sessions;
    for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        json j = parse_line(line, path, lineno);
        Session s;
        if (!j.contains("query") || !j["query"].is_string())
            bad_record(path, lineno, "missing or non-string \"query\"");
        if (!j.contains("results") || !j["results"].is_array())
            bad_record(path, lineno, "missing or non-array \"results\"");
        if (!j.contains("clicks") || !j["clicks"].is_array())
            bad_record(path, lineno, "missing or non-array \"clicks\"");
        s.query_id = j["query"].get<std::string>();
        for (const auto& u : j["results"]) {
            if (!u.is_string()) bad_record(path, lineno, "non-string url in \"results\"");
            s.results.push_back(u.get<std::string>());
        }
        for (const auto& c : j["clicks"]) {
            if (!c.is_number_integer() || (c.get<int>() != 0 && c.get<int>() != 1))
                bad_record(path, lineno, "click values must be 0 or 1");
            s.clicks.push_back(static_cast<uint8_t>(c.get<int>()));
        }
        if (j.contains("user") && j["user"].is_string()) s.user_id = j["user"].get<std::string>();
        if (s.results.size() != s.clicks.size())
            bad_record(path, lineno, "\"results\" and \"clicks\" lengths differ");
        if (s.results.empty()) bad_record(path, lineno, "empty result list");
        if (s.results.size() > max_results)
            bad_record(path, lineno, "result list longer than " + std::to_string(max_results));
        std::set<std::string> uniq(s.results.begin(), s.results.end());
        if (uniq.size() != s.results.size())
            bad_record(path, lineno, "duplicate url within session");
        sessions.push_back(std::move(s));
    });
    return sessions;
}

std::map<std::string, std::map<std::string, Snippet>> load_snippets(const std::string& path) {
    std::map<std::string, std::map<std::string, Snippet>> out;
    for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        json j = parse_line(line, path, lineno);
        for (const char* key : {"query", "url", "title", "abstract"})
            if (!j.contains(key) || !j[key].is_string())
                bad_record(path, lineno, std::string("missing or non-string \"") + key + "\"");
        out[j["query"].get<std::string>()][j["url"].get<std::string>()] = make_snippet(
            j["url"].get<std::string>(), j["title"].get<std::string>(),
            j["abstract"].get<std::string>());
    });
    return out;
}

std::vector<GradedJudgment> load_judgments(const std::string& path) {
    std::vector<GradedJudgment> out;
    for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        json j = parse_line(line, path, lineno);
        GradedJudgment g;
        if (!j.contains("query") || !j["query"].is_string())
            bad_record(path, lineno, "missing or non-string \"query\"");
        if (!j.contains("url") || !j["url"].is_string())
            bad_record(path, lineno, "missing or non-string \"url\"");
        if (!j.contains("grade") || !j["grade"].is_number_integer())
            bad_record(path, lineno, "missing or non-integer \"grade\"");
        if (!j.contains("baseline_score") || !j["baseline_score"].is_number())
            bad_record(path, lineno, "missing or non-numeric \"baseline_score\"");
        g.query_id = j["query"].get<std::string>();
        g.url = j["url"].get<std::string>();
        g.grade = j["grade"].get<int>();
        g.baseline_score = j["baseline_score"].get<double>();
        if (g.grade < 0 || g.grade > 4) bad_record(path, lineno, "grade outside {0..4}");
        if (!std::isfinite(g.baseline_score))
            bad_record(path, lineno, "baseline_score not finite");
        if (j.contains("baseline_features")) {
            if (!j["baseline_features"].is_array())
                bad_record(path, lineno, "\"baseline_features\" must be an array");
            for (const auto& v : j["baseline_features"]) {
                if (!v.is_number()) bad_record(path, lineno, "non-numeric baseline feature");
                g.baseline_features.push_back(v.get<double>());
            }
        }
        out.push_back(std::move(g));
    });
    return out;
}

void save_sessions(const std::string& path, const std::vector<Session>& sessions) {
    std::string buf;
    for (const auto& s : sessions) {
        json j;
        j["query"] = s.query_id;
        j["results"] = s.results;
        std::vector<int> clicks(s.clicks.begin(), s.clicks.end());
        j["clicks"] = clicks;
        if (!s.user_id.empty()) j["user"] = s.user_id;
        buf += j.dump();
        buf.push_back('\n');
    }
    write_file(path, buf);
}

void save_snippets(const std::string& path,
                   const std::map<std::string, std::map<std::string, Snippet>>& snippets) {
    std::string buf;
    for (const auto& [query, by_url] : snippets) {
        for (const auto& [url, sn] : by_url) {
            json j;
            j["query"] = query;
            j["url"] = url;
            j["title"] = sn.title;
            j["abstract"] = sn.abstract_text;
            buf += j.dump();
            buf.push_back('\n');
        }
    }
    write_file(path, buf);
}

void save_judgments(const std::string& path, const std::vector<GradedJudgment>& judgments) {
    std::string buf;
    for (const auto& g : judgments) {
        json j;
        j["query"] = g.query_id;
        j["url"] = g.url;
        j["grade"] = g.grade;
        j["baseline_score"] = g.baseline_score;
        if (!g.baseline_features.empty()) j["baseline_features"] = g.baseline_features;
        buf += j.dump();
        buf.push_back('\n');
    }
    write_file(path, buf);
}

std::map<std::string, UrlStats> build_url_stats(const std::vector<Session>& sessions) {
    std::map<std::string, UrlStats> stats;
    for (const auto& s : sessions) {
        for (std::size_t i = 0; i < s.results.size(); ++i) {
            auto& st = stats[s.results[i]];
            if (st.url.empty()) st.url = s.results[i];
            ++st.num_views;
            if (s.clicks[i]) st.expanded_queries.insert(s.query_id);
        }
    }
    return stats;
}

}  // namespace tailrank
