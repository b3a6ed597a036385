#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tailrank/corpus.hpp"

namespace tailrank {

enum class TopLevelDomain { kCom = 0, kOrg, kNet, kEdu, kOthers };

const char* tld_name(TopLevelDomain tld);

// Last dot-separated host label mapped to {com, org, net, edu}, anything
// else (including unparseable urls) is kOthers.
TopLevelDomain top_level_domain(std::string_view url);

// Levenshtein distance, classic dynamic program.
std::size_t edit_distance(std::string_view a, std::string_view b);

// True iff distance <= floor(len(query_token) / 4); tokens shorter than 4
// characters must match exactly.
bool approx_match(std::string_view query_token, std::string_view snippet_token);

struct SnippetFeatures {
    // Language / readability
    double num_chars_snippet = 0;  // characters in title + abstract
    double num_words_snippet = 0;
    double num_segments = 0;
    double num_word_init_cap = 0;
    double frac_word_init_cap = 0;
    double num_cap_char_title_url = 0;
    double frac_cap_char_title_abstract = 0;
    // Word-level attractiveness
    double frac_attr_word = 0;
    // URL
    double url_num_chars = 0;
    TopLevelDomain tld = TopLevelDomain::kOthers;
    double num_level_domain = 0;
    double num_views = 0;
    // Matching (over the concatenated title + abstract token stream unless
    // noted; frac_apx_match is over the title + url token set)
    double num_match = 0;
    double num_uniq_match = 0;
    double num_apx_match = 0;
    double frac_match = 0;
    double frac_apx_match = 0;
    double num_bef_match = 0;
    double num_btw_match = 0;
    double is_exact_match = 0;
    double is_order_match = 0;
    double is_seg_match = 0;
    // Expanded-query matching
    double frac_match_expanded = 0;

    // Dense vector with the categorical tld one-hot encoded (5 columns).
    std::vector<double> to_vector() const;
    static const std::vector<std::string>& names();
    static constexpr std::size_t kDimension = 27;
};

struct AttractiveLexicon {
    struct Entry {
        std::string word;
        double t = 0.0;
        double p = 1.0;
    };
    std::vector<Entry> entries;
    std::unordered_set<std::string> words;
    double alpha = 0.05;
    std::size_t queries_used = 0;
    std::size_t queries_skipped = 0;

    bool contains(const std::string& w) const { return words.count(w) > 0; }
};

struct TitleWithAttractiveness {
    std::string title;
    double attractiveness = 0.0;
};

struct QueryTitles {
    std::string query;
    std::vector<TitleWithAttractiveness> titles;
};

// Per query, A = titles of the 2 most attractive urls and U = of the 2
// least; per word, Welch t-test on title-membership indicators between A
// and U. Keeps words with positive mean difference and p <= alpha.
// Queries contributing fewer than 4 titles are skipped.
AttractiveLexicon build_attractive_lexicon(const std::vector<QueryTitles>& head_data,
                                           double alpha = 0.05);

void save_lexicon(const std::string& path, const AttractiveLexicon& lexicon);
AttractiveLexicon load_lexicon(const std::string& path);

// Fraction of query tokens with an approximate match in the title-or-url
// token set.
double frac_apx_match(const std::vector<std::string>& query_tokens,
                      const std::vector<std::string>& title_tokens,
                      const std::vector<std::string>& url_tokens);

// Fraction of query tokens present in the union of tokens of the expanded
// queries; empty expansion set yields 0.
double frac_match_expanded(const std::vector<std::string>& query_tokens,
                           const std::set<std::string>& expanded_queries);

// Number of query tokens with no exact match among the title tokens.
std::size_t miss_count(const std::vector<std::string>& query_tokens,
                       const std::vector<std::string>& title_tokens);

SnippetFeatures extract_features(const Query& query, const Snippet& snippet,
                                 const std::map<std::string, UrlStats>& url_stats,
                                 const AttractiveLexicon& lexicon);

void save_features_tsv(const std::string& path,
                       const std::vector<std::tuple<std::string, std::string, SnippetFeatures>>&
                           rows);  // (query, url, features)

}  // namespace tailrank
