#include "tailrank/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace tailrank {

std::vector<Session> subsample_sessions(const std::vector<Session>& sessions, std::size_t count,
                                        Rng rng) {
    std::map<std::string, std::vector<const Session*>> by_query;
    for (const auto& s : sessions) by_query[s.query_id].push_back(&s);
    std::vector<Session> out;
    uint64_t qi = 0;
    for (const auto& [query, qsessions] : by_query) {
        Rng qrng = rng.derive(qi++, fnv1a64(query));
        const std::size_t keep = std::min(count, qsessions.size());
        std::vector<std::size_t> idx(qsessions.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < keep; ++i)
            std::swap(idx[i], idx[i + qrng.next_below(idx.size() - i)]);
        std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<long>(keep));
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t i : chosen) out.push_back(*qsessions[i]);
    }
    return out;
}

std::vector<QueryTitles> lexicon_inputs(
    const DbnEstimate& estimate,
    const std::map<std::string, std::map<std::string, Snippet>>& snippets) {
    std::vector<QueryTitles> out;
    for (const auto& [query, by_url] : snippets) {
        QueryTitles qt;
        qt.query = query;
        for (const auto& [url, snippet] : by_url) {
            const UrlEstimate* e = estimate.find(query, url);
            if (!e) continue;
            qt.titles.push_back({snippet.title, e->a});
        }
        if (!qt.titles.empty()) out.push_back(std::move(qt));
    }
    return out;
}

FeatureTable build_feature_table(
    const std::map<std::string, std::map<std::string, Snippet>>& snippets,
    const std::map<std::string, UrlStats>& url_stats, const AttractiveLexicon& lexicon) {
    FeatureTable table;
    for (const auto& [query, by_url] : snippets) {
        const Query q = make_query(query);
        for (const auto& [url, snippet] : by_url)
            table[query][url] = extract_features(q, snippet, url_stats, lexicon).to_vector();
    }
    return table;
}

TailProtocolResult run_tail_protocol(
    const std::vector<Session>& sessions,
    const std::map<std::string, std::map<std::string, Snippet>>& snippets,
    const TailProtocolConfig& config) {
    if (config.test_fraction <= 0.0 || config.test_fraction >= 1.0)
        throw ConfigError("test_fraction outside (0,1)");
    Rng rng(config.seed);

    // Deterministic query split.
    std::vector<std::string> queries;
    for (const auto& [query, by_url] : snippets) queries.push_back(query);
    const std::size_t stride =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(1.0 / config.test_fraction)));
    std::vector<std::string> test_queries;
    std::map<std::string, bool> is_test;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        is_test[queries[i]] = i % stride == stride - 1;
        if (is_test[queries[i]]) test_queries.push_back(queries[i]);
    }
    if (test_queries.empty() || test_queries.size() == queries.size())
        throw DataError("query split left an empty train or test side");

    std::vector<Session> train_sessions, test_sessions;
    for (const auto& s : sessions) {
        if (!is_test.count(s.query_id)) continue;  // sessions without snippets are ignored
        (is_test[s.query_id] ? test_sessions : train_sessions).push_back(s);
    }

    // Full-data DBN fit provides the attractiveness targets on both sides.
    const DbnEstimate full = fit_dbn(sessions, config.dbn);

    // Lexicon and url stats come from the training side only.
    const auto url_stats = build_url_stats(train_sessions);
    std::vector<QueryTitles> head;
    for (auto& qt : lexicon_inputs(full, snippets))
        if (!is_test[qt.query]) head.push_back(std::move(qt));
    const AttractiveLexicon lexicon = build_attractive_lexicon(head);

    const FeatureTable features = build_feature_table(snippets, url_stats, lexicon);

    // f_snippet on the training queries.
    FeatureTable train_features, test_features;
    for (const auto& [query, by_url] : features)
        (is_test[query] ? test_features : train_features)[query] = by_url;
    const auto snippet_pairs = attractiveness_pairs(full, train_features);
    TailProtocolResult result;
    result.f_snippet = train(snippet_pairs, config.gbrank, SnippetFeatures::names());

    // Click augmentation with a random per-query sampling rate.
    std::map<std::string, double> rates;
    uint64_t qi = 0;
    for (const auto& query : queries)
        rates[query] = Rng(rng.derive(0xa6, qi++).next_u64()).uniform(config.r_min, config.r_max);
    const ClickAugmentation aug =
        augment_with_click(sessions, rates, config.dbn, rng.derive(0xc1));

    auto augmented_vector = [&](const std::string& query, const std::string& url,
                                const std::vector<double>& base) {
        std::vector<double> v = base;
        double a_prime = aug.prior_mode;
        if (auto qit = aug.a_prime.find(query); qit != aug.a_prime.end())
            if (auto uit = qit->second.find(url); uit != qit->second.end()) a_prime = uit->second;
        double count = 0.0;
        if (auto cit = aug.session_count.find(query); cit != aug.session_count.end())
            count = static_cast<double>(cit->second);
        v.push_back(a_prime);
        v.push_back(count);
        return v;
    };
    std::vector<std::string> aug_names = SnippetFeatures::names();
    aug_names.push_back("click_attractiveness");
    aug_names.push_back("session_count");

    FeatureTable train_aug, test_aug;
    for (const auto& [query, by_url] : features)
        for (const auto& [url, vec] : by_url)
            (is_test[query] ? test_aug : train_aug)[query][url] = augmented_vector(query, url, vec);
    const auto click_pairs = attractiveness_pairs(full, train_aug);
    result.f_snippet_click = train(click_pairs, config.gbrank, aug_names);

    // a_tail from a handful of sessions per held-out query.
    const auto tail_sessions =
        subsample_sessions(test_sessions, config.tail_sessions, rng.derive(0x7a));
    const DbnEstimate tail = fit_dbn(tail_sessions, config.dbn);

    // Evaluation pairs on held-out queries, oriented by the full-data fit.
    std::vector<ScoredPair> pairs_tail, pairs_snippet, pairs_click;
    for (const auto& query : test_queries) {
        const auto& by_url = features.at(query);
        for (auto hi = by_url.begin(); hi != by_url.end(); ++hi) {
            for (auto lo = std::next(hi); lo != by_url.end(); ++lo) {
                const double a_hi = full.attractiveness(query, hi->first);
                const double a_lo = full.attractiveness(query, lo->first);
                if (a_hi == a_lo) continue;
                const auto& u_hi = a_hi > a_lo ? hi->first : lo->first;
                const auto& u_lo = a_hi > a_lo ? lo->first : hi->first;
                pairs_tail.push_back(
                    {tail.attractiveness(query, u_hi) - tail.attractiveness(query, u_lo)});
                pairs_snippet.push_back({result.f_snippet.predict(features.at(query).at(u_hi)) -
                                         result.f_snippet.predict(features.at(query).at(u_lo))});
                pairs_click.push_back(
                    {result.f_snippet_click.predict(test_aug.at(query).at(u_hi)) -
                     result.f_snippet_click.predict(test_aug.at(query).at(u_lo))});
            }
        }
    }
    auto taus_for = [&](const std::vector<ScoredPair>& pairs) {
        if (!config.taus.empty()) return config.taus;
        std::vector<double> mags;
        mags.reserve(pairs.size());
        for (const auto& p : pairs) mags.push_back(std::abs(p.predicted_gap));
        std::sort(mags.begin(), mags.end());
        std::vector<double> taus{-1e-12};
        for (int q = 5; q <= 95; q += 5)
            taus.push_back(mags[std::min(mags.size() - 1, mags.size() * static_cast<std::size_t>(q) / 100)]);
        taus.push_back(mags.back());
        return taus;
    };
    result.test_queries = test_queries.size();
    result.eval_pairs = pairs_tail.size();
    result.curve_tail = pairwise_pr(pairs_tail, taus_for(pairs_tail));
    result.curve_snippet = pairwise_pr(pairs_snippet, taus_for(pairs_snippet));
    result.curve_snippet_click = pairwise_pr(pairs_click, taus_for(pairs_click));
    result.auc_tail = result.curve_tail.auc();
    result.auc_snippet = result.curve_snippet.auc();
    result.auc_snippet_click = result.curve_snippet_click.auc();
    return result;
}

}  // namespace tailrank
