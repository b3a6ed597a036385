#include "tailrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

using nlohmann::json;

namespace tailrank {

std::vector<PreferencePair> attractiveness_pairs(const DbnEstimate& estimate,
                                                 const FeatureTable& features) {
    std::vector<PreferencePair> pairs;
    for (const auto& [query, by_url] : features) {
        if (by_url.size() < 2) continue;
        for (auto hi = by_url.begin(); hi != by_url.end(); ++hi) {
            const UrlEstimate* ehi = estimate.find(query, hi->first);
            if (!ehi) throw DataError("no DBN estimate for " + query + " / " + hi->first);
            for (auto lo = by_url.begin(); lo != by_url.end(); ++lo) {
                if (hi == lo) continue;
                const UrlEstimate* elo = estimate.find(query, lo->first);
                if (!elo) throw DataError("no DBN estimate for " + query + " / " + lo->first);
                if (ehi->a > elo->a)
                    pairs.push_back({hi->second, lo->second, ehi->a - elo->a});
            }
        }
    }
    return pairs;
}

std::vector<PreferencePair> judgment_pairs(const std::vector<GradedJudgment>& judgments,
                                           const FeatureTable& features) {
    std::map<std::string, std::vector<const GradedJudgment*>> by_query;
    for (const auto& g : judgments) by_query[g.query_id].push_back(&g);
    std::vector<PreferencePair> pairs;
    for (const auto& [query, rows] : by_query) {
        auto lookup = [&](const GradedJudgment& g) -> const std::vector<double>& {
            auto qit = features.find(query);
            if (qit == features.end())
                throw DataError("no features for query " + query);
            auto uit = qit->second.find(g.url);
            if (uit == qit->second.end())
                throw DataError("no features for " + query + " / " + g.url);
            return uit->second;
        };
        for (const GradedJudgment* hi : rows)
            for (const GradedJudgment* lo : rows)
                if (hi->grade > lo->grade)
                    pairs.push_back({lookup(*hi), lookup(*lo),
                                     static_cast<double>(hi->grade - lo->grade)});
    }
    return pairs;
}

ClickAugmentation augment_with_click(const std::vector<Session>& sessions,
                                     const std::map<std::string, double>& rate_percent_by_query,
                                     const DbnFitConfig& dbn_config, Rng rng) {
    std::map<std::string, std::vector<const Session*>> by_query;
    for (const auto& s : sessions) by_query[s.query_id].push_back(&s);

    ClickAugmentation out;
    out.prior_mode = dbn_config.prior_a.mode();
    std::vector<Session> subsample;
    uint64_t query_index = 0;
    for (const auto& [query, qsessions] : by_query) {
        auto rit = rate_percent_by_query.find(query);
        const double rate = rit == rate_percent_by_query.end() ? 100.0 : rit->second;
        if (rate <= 0.0 || rate > 100.0) throw ConfigError("sampling rate outside (0,100]");
        const std::size_t keep = std::min(
            qsessions.size(),
            static_cast<std::size_t>(
                std::ceil(rate / 100.0 * static_cast<double>(qsessions.size()))));
        // Deterministic partial Fisher-Yates draw of `keep` session indices.
        Rng qrng = rng.derive(query_index++, fnv1a64(query));
        std::vector<std::size_t> idx(qsessions.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < keep; ++i) {
            const std::size_t j = i + qrng.next_below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<long>(keep));
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t i : chosen) subsample.push_back(*qsessions[i]);
        out.session_count[query] = keep;
    }

    if (!subsample.empty()) {
        DbnEstimate est = fit_dbn(subsample, dbn_config);
        for (const auto& [query, by_url] : est.entries)
            for (const auto& [url, e] : by_url) out.a_prime[query][url] = e.a;
    }
    // Queries (or urls) missing from the subsample fit fall back to the
    // prior mode at lookup time; record zero-session queries explicitly.
    for (const auto& [query, qsessions] : by_query)
        if (!out.session_count.count(query)) out.session_count[query] = 0;
    return out;
}

namespace {

std::map<std::string, double> min_max_normalize(const std::map<std::string, double>& scores) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [url, s] : scores) {
        if (!std::isfinite(s)) throw DataError("non-finite score for url " + url);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    std::map<std::string, double> out;
    for (const auto& [url, s] : scores)
        out[url] = hi > lo ? (s - lo) / (hi - lo) : 0.5;
    return out;
}

}  // namespace

RankedList rank_by_score(const std::string& query_id,
                         const std::map<std::string, double>& scores) {
    RankedList out;
    out.query_id = query_id;
    out.ranking.assign(scores.begin(), scores.end());
    std::sort(out.ranking.begin(), out.ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

RankedList strategy_one(const std::string& query_id,
                        const std::map<std::string, double>& baseline_scores,
                        const std::map<std::string, double>& attr_scores, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda outside [0,1]");
    if (baseline_scores.size() != attr_scores.size())
        throw DataError("score maps cover different url sets");
    for (const auto& [url, s] : baseline_scores)
        if (!attr_scores.count(url)) throw DataError("url missing from attractiveness scores: " + url);

    // Endpoints bypass normalization: (v - lo) / (hi - lo) can round tiny
    // score gaps into exact ties, which would perturb the pure-baseline and
    // pure-attractiveness orderings through the url tie-break.
    if (lambda == 1.0) return rank_by_score(query_id, baseline_scores);
    if (lambda == 0.0) return rank_by_score(query_id, attr_scores);

    const auto base = min_max_normalize(baseline_scores);
    const auto attr = min_max_normalize(attr_scores);
    std::map<std::string, double> combined;
    for (const auto& [url, b] : base) combined[url] = lambda * b + (1.0 - lambda) * attr.at(url);
    return rank_by_score(query_id, combined);
}

std::vector<double> strategy_two_features(const std::vector<double>& baseline_features,
                                          const std::vector<double>& snippet_features) {
    std::vector<double> out = baseline_features;
    out.insert(out.end(), snippet_features.begin(), snippet_features.end());
    return out;
}

std::vector<std::string> strategy_two_names(const std::vector<std::string>& baseline_names,
                                            const std::vector<std::string>& snippet_names) {
    std::vector<std::string> out = baseline_names;
    out.insert(out.end(), snippet_names.begin(), snippet_names.end());
    std::set<std::string> seen;
    for (const auto& n : out)
        if (!seen.insert(n).second) throw DataError("duplicate feature name: " + n);
    return out;
}

void save_reranked(const std::string& path, const std::vector<RankedList>& lists) {
    std::string buf;
    for (const auto& list : lists) {
        json j;
        j["query"] = list.query_id;
        json ranking = json::array();
        for (const auto& [url, score] : list.ranking)
            ranking.push_back({{"url", url}, {"score", score}});
        j["ranking"] = std::move(ranking);
        buf += j.dump();
        buf.push_back('\n');
    }
    write_file(path, buf);
}

}  // namespace tailrank
