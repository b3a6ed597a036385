#include "tailrank/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

using nlohmann::json;

namespace tailrank {

const char* tld_name(TopLevelDomain tld) {
    switch (tld) {
        case TopLevelDomain::kCom: return "com";
        case TopLevelDomain::kOrg: return "org";
        case TopLevelDomain::kNet: return "net";
        case TopLevelDomain::kEdu: return "edu";
        default: return "others";
    }
}

namespace {

std::string extract_host(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
    auto end = url.find_first_of("/?#");
    if (end != std::string_view::npos) url = url.substr(0, end);
    auto at = url.rfind('@');
    if (at != std::string_view::npos) url.remove_prefix(at + 1);
    auto colon = url.find(':');
    if (colon != std::string_view::npos) url = url.substr(0, colon);
    std::string host(url);
    std::transform(host.begin(), host.end(), host.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return host;
}

std::vector<std::string> host_labels(const std::string& host) {
    std::vector<std::string> labels;
    std::string cur;
    for (char c : host) {
        if (c == '.') {
            if (!cur.empty()) labels.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) labels.push_back(cur);
    return labels;
}

}  // namespace

TopLevelDomain top_level_domain(std::string_view url) {
    const std::string host = extract_host(url);
    const auto labels = host_labels(host);
    if (labels.empty()) return TopLevelDomain::kOthers;
    const std::string& last = labels.back();
    if (last == "com") return TopLevelDomain::kCom;
    if (last == "org") return TopLevelDomain::kOrg;
    if (last == "net") return TopLevelDomain::kNet;
    if (last == "edu") return TopLevelDomain::kEdu;
    return TopLevelDomain::kOthers;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

bool approx_match(std::string_view query_token, std::string_view snippet_token) {
    const std::size_t threshold = query_token.size() / 4;
    if (threshold == 0) return query_token == snippet_token;
    return edit_distance(query_token, snippet_token) <= threshold;
}

double frac_apx_match(const std::vector<std::string>& query_tokens,
                      const std::vector<std::string>& title_tokens,
                      const std::vector<std::string>& url_tokens) {
    std::vector<std::string> distinct;
    for (const auto& q : query_tokens)
        if (std::find(distinct.begin(), distinct.end(), q) == distinct.end())
            distinct.push_back(q);
    if (distinct.empty()) return 0.0;
    std::size_t matched = 0;
    for (const auto& q : distinct) {
        bool hit = false;
        for (const auto& t : title_tokens)
            if (approx_match(q, t)) { hit = true; break; }
        if (!hit)
            for (const auto& t : url_tokens)
                if (approx_match(q, t)) { hit = true; break; }
        if (hit) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(distinct.size());
}

double frac_match_expanded(const std::vector<std::string>& query_tokens,
                           const std::set<std::string>& expanded_queries) {
    std::vector<std::string> distinct;
    for (const auto& q : query_tokens)
        if (std::find(distinct.begin(), distinct.end(), q) == distinct.end())
            distinct.push_back(q);
    if (distinct.empty() || expanded_queries.empty()) return 0.0;
    std::set<std::string> expanded_tokens;
    for (const auto& eq : expanded_queries)
        for (auto& tok : tokenize(eq)) expanded_tokens.insert(std::move(tok));
    std::size_t matched = 0;
    for (const auto& q : distinct)
        if (expanded_tokens.count(q)) ++matched;
    return static_cast<double>(matched) / static_cast<double>(distinct.size());
}

std::size_t miss_count(const std::vector<std::string>& query_tokens,
                       const std::vector<std::string>& title_tokens) {
    std::size_t missing = 0;
    std::vector<std::string> seen;
    for (const auto& q : query_tokens) {
        if (std::find(seen.begin(), seen.end(), q) != seen.end()) continue;
        seen.push_back(q);
        if (std::find(title_tokens.begin(), title_tokens.end(), q) == title_tokens.end())
            ++missing;
    }
    return missing;
}

namespace {

std::size_t count_caps(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; }));
}

void count_init_cap_words(std::string_view text, std::size_t& words, std::size_t& cap_words) {
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
            if (c >= 'A' && c <= 'Z') ++cap_words;
        }
    }
}

// Contiguous occurrence of `needle` inside `haystack`.
bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < needle.size(); ++j)
            if (haystack[i + j] != needle[j]) { ok = false; break; }
        if (ok) return true;
    }
    return false;
}

// Length of the smallest stream window holding at least one occurrence of
// every wanted token id; 0 when impossible.
std::size_t min_cover_window(const std::vector<int>& stream_ids, std::size_t num_wanted) {
    std::vector<std::size_t> counts(num_wanted, 0);
    std::size_t covered = 0, best = 0, left = 0;
    for (std::size_t right = 0; right < stream_ids.size(); ++right) {
        const int id = stream_ids[right];
        if (id >= 0 && counts[static_cast<std::size_t>(id)]++ == 0) ++covered;
        while (covered == num_wanted) {
            const std::size_t len = right - left + 1;
            if (best == 0 || len < best) best = len;
            const int lid = stream_ids[left++];
            if (lid >= 0 && --counts[static_cast<std::size_t>(lid)] == 0) --covered;
        }
    }
    return best;
}

}  // namespace

SnippetFeatures extract_features(const Query& query, const Snippet& snippet,
                                 const std::map<std::string, UrlStats>& url_stats,
                                 const AttractiveLexicon& lexicon) {
    SnippetFeatures f;

    f.num_chars_snippet =
        static_cast<double>(snippet.title.size() + snippet.abstract_text.size());
    f.num_words_snippet =
        static_cast<double>(snippet.title_tokens.size() + snippet.abstract_tokens.size());
    f.num_segments = static_cast<double>(snippet.segments.size());

    std::size_t words = 0, cap_words = 0;
    count_init_cap_words(snippet.title, words, cap_words);
    count_init_cap_words(snippet.abstract_text, words, cap_words);
    f.num_word_init_cap = static_cast<double>(cap_words);
    f.frac_word_init_cap = words ? static_cast<double>(cap_words) / static_cast<double>(words) : 0.0;
    f.num_cap_char_title_url =
        static_cast<double>(count_caps(snippet.title) + count_caps(snippet.url));
    const std::size_t ta_chars = snippet.title.size() + snippet.abstract_text.size();
    f.frac_cap_char_title_abstract =
        ta_chars ? static_cast<double>(count_caps(snippet.title) +
                                       count_caps(snippet.abstract_text)) /
                       static_cast<double>(ta_chars)
                 : 0.0;

    if (!snippet.title_tokens.empty()) {
        std::size_t attr = 0;
        for (const auto& t : snippet.title_tokens)
            if (lexicon.contains(t)) ++attr;
        f.frac_attr_word = static_cast<double>(attr) / static_cast<double>(snippet.title_tokens.size());
    }

    f.url_num_chars = static_cast<double>(snippet.url.size());
    f.tld = top_level_domain(snippet.url);
    f.num_level_domain = static_cast<double>(host_labels(extract_host(snippet.url)).size());

    const UrlStats* stats = nullptr;
    if (auto it = url_stats.find(snippet.url); it != url_stats.end()) stats = &it->second;
    f.num_views = stats ? static_cast<double>(stats->num_views) : 0.0;

    // Matching over the concatenated title + abstract token stream.
    std::vector<std::string> stream = snippet.title_tokens;
    stream.insert(stream.end(), snippet.abstract_tokens.begin(), snippet.abstract_tokens.end());

    std::vector<std::string> qtokens;  // distinct, first-occurrence order
    for (const auto& q : query.tokens)
        if (std::find(qtokens.begin(), qtokens.end(), q) == qtokens.end()) qtokens.push_back(q);
    const std::size_t nq = qtokens.size();

    auto qindex = [&](const std::string& tok) -> int {
        for (std::size_t i = 0; i < nq; ++i)
            if (qtokens[i] == tok) return static_cast<int>(i);
        return -1;
    };

    std::vector<int> stream_ids(stream.size(), -1);
    std::size_t total_match = 0, apx = 0;
    std::vector<uint8_t> matched(nq, 0);
    std::size_t first_match = stream.size();
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const int id = qindex(stream[i]);
        stream_ids[i] = id;
        if (id >= 0) {
            ++total_match;
            matched[static_cast<std::size_t>(id)] = 1;
            if (first_match == stream.size()) first_match = i;
        }
        bool apx_hit = id >= 0;
        for (std::size_t j = 0; j < nq && !apx_hit; ++j)
            apx_hit = approx_match(qtokens[j], stream[i]);
        if (apx_hit) ++apx;
    }
    const std::size_t uniq =
        static_cast<std::size_t>(std::count(matched.begin(), matched.end(), uint8_t{1}));

    f.num_match = static_cast<double>(total_match);
    f.num_uniq_match = static_cast<double>(uniq);
    f.num_apx_match = static_cast<double>(apx);
    f.frac_match = nq ? static_cast<double>(uniq) / static_cast<double>(nq) : 0.0;
    f.frac_apx_match = frac_apx_match(query.tokens, snippet.title_tokens, snippet.url_tokens);
    f.num_bef_match = static_cast<double>(first_match);

    // Remap ids so only matched tokens take part in the window search.
    if (uniq >= 2) {
        std::vector<int> remap(nq, -1);
        int next = 0;
        for (std::size_t i = 0; i < nq; ++i)
            if (matched[i]) remap[i] = next++;
        std::vector<int> window_ids(stream_ids.size(), -1);
        for (std::size_t i = 0; i < stream_ids.size(); ++i)
            if (stream_ids[i] >= 0) window_ids[i] = remap[static_cast<std::size_t>(stream_ids[i])];
        const std::size_t window = min_cover_window(window_ids, uniq);
        f.num_btw_match = static_cast<double>(window > uniq ? window - uniq : 0);
    }

    f.is_exact_match = (!query.tokens.empty() &&
                        (contains_run(snippet.title_tokens, query.tokens) ||
                         contains_run(snippet.abstract_tokens, query.tokens)))
                           ? 1.0
                           : 0.0;

    if (uniq > 0) {
        // Matched query tokens, in query order, as a subsequence of the stream.
        std::size_t pos = 0;
        bool ordered = true;
        for (std::size_t i = 0; i < nq && ordered; ++i) {
            if (!matched[i]) continue;
            while (pos < stream_ids.size() && stream_ids[pos] != static_cast<int>(i)) ++pos;
            if (pos == stream_ids.size()) ordered = false;
            ++pos;
        }
        f.is_order_match = ordered ? 1.0 : 0.0;

        // Single segment (title counts as one) containing every matched token.
        std::vector<std::vector<std::string>> candidates;
        candidates.push_back(snippet.title_tokens);
        for (const auto& seg : snippet.segments) candidates.push_back(tokenize(seg));
        for (const auto& cand : candidates) {
            bool all = true;
            for (std::size_t i = 0; i < nq && all; ++i) {
                if (!matched[i]) continue;
                all = std::find(cand.begin(), cand.end(), qtokens[i]) != cand.end();
            }
            if (all) { f.is_seg_match = 1.0; break; }
        }
    }
    if (f.is_exact_match == 1.0) f.is_order_match = 1.0;

    if (stats) f.frac_match_expanded = frac_match_expanded(query.tokens, stats->expanded_queries);
    return f;
}

std::vector<double> SnippetFeatures::to_vector() const {
    std::vector<double> v;
    v.reserve(kDimension);
    v.push_back(num_chars_snippet);
    v.push_back(num_words_snippet);
    v.push_back(num_segments);
    v.push_back(num_word_init_cap);
    v.push_back(frac_word_init_cap);
    v.push_back(num_cap_char_title_url);
    v.push_back(frac_cap_char_title_abstract);
    v.push_back(frac_attr_word);
    v.push_back(url_num_chars);
    for (int t = 0; t < 5; ++t) v.push_back(static_cast<int>(tld) == t ? 1.0 : 0.0);
    v.push_back(num_level_domain);
    v.push_back(num_views);
    v.push_back(num_match);
    v.push_back(num_uniq_match);
    v.push_back(num_apx_match);
    v.push_back(frac_match);
    v.push_back(frac_apx_match);
    v.push_back(num_bef_match);
    v.push_back(num_btw_match);
    v.push_back(is_exact_match);
    v.push_back(is_order_match);
    v.push_back(is_seg_match);
    v.push_back(frac_match_expanded);
    return v;
}

const std::vector<std::string>& SnippetFeatures::names() {
    static const std::vector<std::string> kNames = {
        "num_chars_snippet", "num_words_snippet", "num_segments", "num_word_init_cap",
        "frac_word_init_cap", "num_cap_char_title_url", "frac_cap_char_title_abstract",
        "frac_attr_word", "url_num_chars", "tld_com", "tld_org", "tld_net", "tld_edu",
        "tld_others", "num_level_domain", "num_views", "num_match", "num_uniq_match",
        "num_apx_match", "frac_match", "frac_apx_match", "num_bef_match", "num_btw_match",
        "is_exact_match", "is_order_match", "is_seg_match", "frac_match_expanded"};
    return kNames;
}

AttractiveLexicon build_attractive_lexicon(const std::vector<QueryTitles>& head_data,
                                           double alpha) {
    if (alpha <= 0.0 || alpha > 1.0) throw ConfigError("significance level outside (0,1]");
    AttractiveLexicon lex;
    lex.alpha = alpha;

    std::vector<std::vector<std::string>> attractive_titles, unattractive_titles;
    for (const auto& qt : head_data) {
        if (qt.titles.size() < 4) {
            ++lex.queries_skipped;
            continue;
        }
        ++lex.queries_used;
        auto sorted = qt.titles;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const TitleWithAttractiveness& x, const TitleWithAttractiveness& y) {
                             if (x.attractiveness != y.attractiveness)
                                 return x.attractiveness > y.attractiveness;
                             return x.title < y.title;
                         });
        attractive_titles.push_back(tokenize(sorted[0].title));
        attractive_titles.push_back(tokenize(sorted[1].title));
        unattractive_titles.push_back(tokenize(sorted[sorted.size() - 1].title));
        unattractive_titles.push_back(tokenize(sorted[sorted.size() - 2].title));
    }
    const std::size_t na = attractive_titles.size(), nu = unattractive_titles.size();
    if (na < 2 || nu < 2) return lex;

    std::set<std::string> vocabulary;
    for (const auto& toks : attractive_titles) vocabulary.insert(toks.begin(), toks.end());
    for (const auto& toks : unattractive_titles) vocabulary.insert(toks.begin(), toks.end());

    auto membership_count = [](const std::vector<std::vector<std::string>>& titles,
                               const std::string& w) {
        std::size_t c = 0;
        for (const auto& toks : titles)
            if (std::find(toks.begin(), toks.end(), w) != toks.end()) ++c;
        return c;
    };

    for (const auto& w : vocabulary) {
        const double ma = static_cast<double>(membership_count(attractive_titles, w)) /
                          static_cast<double>(na);
        const double mu = static_cast<double>(membership_count(unattractive_titles, w)) /
                          static_cast<double>(nu);
        if (ma <= mu) continue;
        const double va = ma * (1.0 - ma) * static_cast<double>(na) / static_cast<double>(na - 1);
        const double vu = mu * (1.0 - mu) * static_cast<double>(nu) / static_cast<double>(nu - 1);
        const double se2 = va / static_cast<double>(na) + vu / static_cast<double>(nu);
        double t, p;
        if (se2 <= 0.0) {
            // Indicator present in every attractive title and no unattractive one.
            t = std::numeric_limits<double>::max();
            p = 0.0;
        } else {
            t = (ma - mu) / std::sqrt(se2);
            const double dfn = se2 * se2;
            const double dfd =
                (va / na) * (va / na) / static_cast<double>(na - 1) +
                (vu / nu) * (vu / nu) / static_cast<double>(nu - 1);
            const double df = dfd > 0.0 ? dfn / dfd : static_cast<double>(na + nu - 2);
            boost::math::students_t dist(df);
            p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
        }
        if (p <= alpha) {
            lex.entries.push_back({w, t, p});
            lex.words.insert(w);
        }
    }
    std::sort(lex.entries.begin(), lex.entries.end(),
              [](const AttractiveLexicon::Entry& x, const AttractiveLexicon::Entry& y) {
                  if (x.t != y.t) return x.t > y.t;
                  return x.word < y.word;
              });
    return lex;
}

void save_lexicon(const std::string& path, const AttractiveLexicon& lexicon) {
    json arr = json::array();
    for (const auto& e : lexicon.entries)
        arr.push_back({{"word", e.word}, {"t", e.t}, {"p", e.p}});
    write_file(path, arr.dump(2) + "\n");
}

AttractiveLexicon load_lexicon(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw DataError("malformed lexicon file: " + path);
    AttractiveLexicon lex;
    for (const auto& e : j) {
        AttractiveLexicon::Entry entry;
        entry.word = e.at("word").get<std::string>();
        entry.t = e.at("t").get<double>();
        entry.p = e.at("p").get<double>();
        lex.words.insert(entry.word);
        lex.entries.push_back(std::move(entry));
    }
    return lex;
}

namespace {
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}
}  // namespace

void save_features_tsv(
    const std::string& path,
    const std::vector<std::tuple<std::string, std::string, SnippetFeatures>>& rows) {
    std::string out = "query\turl";
    for (const auto& n : SnippetFeatures::names()) {
        out.push_back('\t');
        out += n;
    }
    out.push_back('\n');
    for (const auto& [query, url, feats] : rows) {
        out += query;
        out.push_back('\t');
        out += url;
        for (double v : feats.to_vector()) {
            out.push_back('\t');
            out += format_double(v);
        }
        out.push_back('\n');
    }
    write_file(path, out);
}

}  // namespace tailrank
