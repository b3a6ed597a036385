#pragma once

#include <map>
#include <string>
#include <vector>

#include "tailrank/corpus.hpp"
#include "tailrank/dbn_em.hpp"
#include "tailrank/gbrank.hpp"

namespace tailrank {

struct RankedList {
    std::string query_id;
    // Descending score; ties broken by ascending url.
    std::vector<std::pair<std::string, double>> ranking;
};

// query -> url -> feature vector
using FeatureTable = std::map<std::string, std::map<std::string, std::vector<double>>>;

// All within-query ordered url pairs with strictly larger attractiveness;
// margin is the attractiveness difference. Queries with fewer than two
// urls contribute nothing.
std::vector<PreferencePair> attractiveness_pairs(const DbnEstimate& estimate,
                                                 const FeatureTable& features);

// Within-query pairs with strictly larger grade; margin is the grade
// difference. Feature vectors are looked up in `features`.
std::vector<PreferencePair> judgment_pairs(const std::vector<GradedJudgment>& judgments,
                                           const FeatureTable& features);

struct ClickAugmentation {
    // query -> url -> attractiveness from the subsampled sessions
    std::map<std::string, std::map<std::string, double>> a_prime;
    std::map<std::string, std::size_t> session_count;
    double prior_mode = 0.5;
};

// Per query, keep ceil(r/100 * n) sessions chosen deterministically from
// the rng and refit the DBN on the subsample. rate_percent may also be a
// per-query map; queries with no subsampled sessions get the prior mode.
ClickAugmentation augment_with_click(const std::vector<Session>& sessions,
                                     const std::map<std::string, double>& rate_percent_by_query,
                                     const DbnFitConfig& dbn_config, Rng rng);

// f_I = lambda * f_org + (1 - lambda) * f_attr after per-query min-max
// normalization of both score maps. Both maps must cover the same urls.
RankedList strategy_one(const std::string& query_id,
                        const std::map<std::string, double>& baseline_scores,
                        const std::map<std::string, double>& attr_scores, double lambda);

RankedList rank_by_score(const std::string& query_id,
                         const std::map<std::string, double>& scores);

// [baseline_block, snippet_block] with stable column naming; duplicate
// names are an error.
std::vector<double> strategy_two_features(const std::vector<double>& baseline_features,
                                          const std::vector<double>& snippet_features);
std::vector<std::string> strategy_two_names(const std::vector<std::string>& baseline_names,
                                            const std::vector<std::string>& snippet_names);

void save_reranked(const std::string& path, const std::vector<RankedList>& lists);

}  // namespace tailrank
