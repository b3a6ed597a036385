#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tailrank/common.hpp"

namespace tailrank {

// Lowercase, split on any non-alphanumeric byte, drop empty fragments.
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

struct Query {
    std::string id;
    std::string raw;
    std::vector<std::string> tokens;
};

Query make_query(const std::string& raw);

struct Snippet {
    std::string url;
    std::string title;
    std::string abstract_text;
    std::vector<std::string> title_tokens;
    std::vector<std::string> abstract_tokens;
    std::vector<std::string> url_tokens;
    // Abstract substrings split on '.' and ellipsis markers, trimmed, empties dropped.
    std::vector<std::string> segments;
};

Snippet make_snippet(const std::string& url, const std::string& title,
                     const std::string& abstract_text);

struct Session {
    std::string query_id;
    std::vector<std::string> results;
    std::vector<uint8_t> clicks;  // same length as results
    std::string user_id;          // optional, may be empty
};

struct GradedJudgment {
    std::string query_id;
    std::string url;
    int grade = 0;  // in {0..4}
    double baseline_score = 0.0;
    // Optional synthetic baseline feature block for feature-expansion training;
    // when absent the block degenerates to [baseline_score].
    std::vector<double> baseline_features;
};

struct UrlStats {
    std::string url;
    uint64_t num_views = 0;
    std::set<std::string> expanded_queries;  // raw query strings that led to clicks
};

inline constexpr std::size_t kDefaultMaxResults = 10;

// Validates every record; throws DataError naming the offending line.
std::vector<Session> load_sessions(const std::string& path,
                                   std::size_t max_results = kDefaultMaxResults);
// query -> url -> snippet
std::map<std::string, std::map<std::string, Snippet>> load_snippets(const std::string& path);
std::vector<GradedJudgment> load_judgments(const std::string& path);

void save_sessions(const std::string& path, const std::vector<Session>& sessions);
void save_snippets(const std::string& path,
                   const std::map<std::string, std::map<std::string, Snippet>>& snippets);
void save_judgments(const std::string& path, const std::vector<GradedJudgment>& judgments);

std::map<std::string, UrlStats> build_url_stats(const std::vector<Session>& sessions);

}  // namespace tailrank
