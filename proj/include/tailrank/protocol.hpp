#pragma once

#include <map>
#include <string>
#include <vector>

#include "tailrank/dbn_em.hpp"
#include "tailrank/eval.hpp"
#include "tailrank/features.hpp"
#include "tailrank/gbrank.hpp"
#include "tailrank/ranking.hpp"

namespace tailrank {

// Simulated-tail evaluation protocol: hold out a query slice, use the
// full-data DBN attractiveness as the target, and compare three ways of
// predicting pairwise attractiveness for the held-out queries:
//   a_tail          - DBN refit on a handful of sessions per query
//   f_snippet       - GBRank on snippet features only
//   f_snippet+click - GBRank on snippet features plus subsampled-click
//                     attractiveness and session count
struct TailProtocolConfig {
    double test_fraction = 0.25;
    std::size_t tail_sessions = 10;
    double r_min = 1.0;    // per-query subsample percentage range for the
    double r_max = 100.0;  // click-augmented model
    // Empty: per-method grid from the quantiles of the observed |score gap|
    // (the three methods score on very different scales).
    std::vector<double> taus;
    DbnFitConfig dbn;
    GbrankConfig gbrank;
    uint64_t seed = 1;
};

struct TailProtocolResult {
    PrCurve curve_tail;
    PrCurve curve_snippet;
    PrCurve curve_snippet_click;
    double auc_tail = 0.0;
    double auc_snippet = 0.0;
    double auc_snippet_click = 0.0;
    TreeEnsemble f_snippet;
    TreeEnsemble f_snippet_click;
    std::size_t test_queries = 0;
    std::size_t eval_pairs = 0;
};

TailProtocolResult run_tail_protocol(
    const std::vector<Session>& sessions,
    const std::map<std::string, std::map<std::string, Snippet>>& snippets,
    const TailProtocolConfig& config);

// Deterministically keep `count` sessions per query (all when fewer).
std::vector<Session> subsample_sessions(const std::vector<Session>& sessions, std::size_t count,
                                        Rng rng);

// Head-query inputs for the attractive-word lexicon: per query, the url
// titles with their estimated attractiveness.
std::vector<QueryTitles> lexicon_inputs(
    const DbnEstimate& estimate,
    const std::map<std::string, std::map<std::string, Snippet>>& snippets);

// Snippet feature vectors for every (query, url) with a snippet.
FeatureTable build_feature_table(
    const std::map<std::string, std::map<std::string, Snippet>>& snippets,
    const std::map<std::string, UrlStats>& url_stats, const AttractiveLexicon& lexicon);

}  // namespace tailrank
