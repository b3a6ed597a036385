#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailrank/common.hpp"

namespace tailrank {

// NDCG_k with exponential gains G = 2^grade - 1 and the ideal permutation
// of the retrieved set as normalizer; an all-zero-grade list scores 1.
double ndcg_at_k(const std::vector<int>& grades_in_ranked_order, std::size_t k);

struct PrPoint {
    double tau = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    std::size_t num_predicted = 0;
};

struct PrCurve {
    std::vector<PrPoint> points;

    // Trapezoidal area over recall, extended to recall 0 (precision of the
    // last point) and capped at the largest observed recall.
    double auc() const;
};

struct ScoredPair {
    double predicted_gap = 0.0;  // f(hi) - f(lo), truth orientation
};

// Within-query unordered pairs with distinct true attractiveness, each
// counted once and oriented by the truth. A pair is predicted at
// threshold tau when |gap| > tau and correct when gap > tau.
PrCurve pairwise_pr(const std::vector<ScoredPair>& pairs, const std::vector<double>& taus);

struct ClickMissTuple {
    std::string query;
    uint64_t clicks_u1 = 0;
    uint64_t clicks_u2 = 0;
    uint64_t impressions_u1 = 1;
    uint64_t impressions_u2 = 1;
    std::size_t miss_u1 = 0;
    std::size_t miss_u2 = 0;
};

struct P0P1 {
    std::optional<double> p0;  // empty when no qualifying tuples
    std::optional<double> p1;
    std::size_t n0 = 0;
    std::size_t n1 = 0;
};

// P0: among tuples with miss(u1) < miss(u2), fraction where u1 is clicked
// strictly more than u2; P1 uses miss(u1) + 1 < miss(u2). With
// use_click_rate, clicks are normalized per impression first.
P0P1 p0_p1(const std::vector<ClickMissTuple>& tuples, bool use_click_rate = false);

// Two-sided p-value; zero differences dropped, ties mid-ranked; exact
// distribution for n <= 25, normal approximation with continuity
// correction above.
double wilcoxon_signed_rank(const std::vector<double>& paired_differences);

}  // namespace tailrank
