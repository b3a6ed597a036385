#include "tailrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tailrank {

double ndcg_at_k(const std::vector<int>& grades_in_ranked_order, std::size_t k) {
    if (grades_in_ranked_order.empty()) throw DataError("empty grade list");
    if (k < 1) throw ConfigError("k must be at least 1");
    for (int g : grades_in_ranked_order)
        if (g < 0 || g > 4) throw DataError("grade outside {0..4}");
    auto gain = [](int g) { return std::exp2(static_cast<double>(g)) - 1.0; };
    auto dcg = [&](const std::vector<int>& grades) {
        double sum = 0.0;
        const std::size_t cut = std::min(k, grades.size());
        for (std::size_t i = 0; i < cut; ++i)
            sum += gain(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
        return sum;
    };
    std::vector<int> ideal = grades_in_ranked_order;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    const double z = dcg(ideal);
    if (z <= 0.0) return 1.0;  // all-zero grades: no permutation ranks better
    return dcg(grades_in_ranked_order) / z;
}

double PrCurve::auc() const {
    if (points.empty()) return 0.0;
    std::vector<std::pair<double, double>> rp;  // (recall, precision)
    for (const auto& p : points) rp.emplace_back(p.recall, p.precision);
    std::sort(rp.begin(), rp.end());
    double area = 0.0;
    double prev_r = 0.0, prev_p = rp.front().second;
    for (const auto& [r, p] : rp) {
        area += (r - prev_r) * (p + prev_p) / 2.0;
        prev_r = r;
        prev_p = p;
    }
    return area;
}

PrCurve pairwise_pr(const std::vector<ScoredPair>& pairs, const std::vector<double>& taus) {
    if (pairs.empty()) throw DataError("no evaluation pairs");
    if (taus.empty()) throw ConfigError("empty tau grid");
    PrCurve curve;
    const double total = static_cast<double>(pairs.size());
    std::vector<double> sorted_taus = taus;
    std::sort(sorted_taus.begin(), sorted_taus.end());
    for (double tau : sorted_taus) {
        std::size_t predicted = 0, correct = 0;
        for (const auto& p : pairs) {
            if (std::abs(p.predicted_gap) > tau) ++predicted;
            if (p.predicted_gap > tau) ++correct;
        }
        PrPoint point;
        point.tau = tau;
        point.num_predicted = predicted;
        point.precision =
            predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 1.0;
        point.recall = static_cast<double>(correct) / total;
        curve.points.push_back(point);
    }
    return curve;
}

P0P1 p0_p1(const std::vector<ClickMissTuple>& tuples, bool use_click_rate) {
    P0P1 out;
    std::size_t hit0 = 0, hit1 = 0;
    for (const auto& t : tuples) {
        double c1 = static_cast<double>(t.clicks_u1);
        double c2 = static_cast<double>(t.clicks_u2);
        if (use_click_rate) {
            if (t.impressions_u1 == 0 || t.impressions_u2 == 0)
                throw DataError("zero impressions with click-rate normalization");
            c1 /= static_cast<double>(t.impressions_u1);
            c2 /= static_cast<double>(t.impressions_u2);
        }
        if (t.miss_u1 < t.miss_u2) {
            ++out.n0;
            if (c1 > c2) ++hit0;
        }
        if (t.miss_u1 + 1 < t.miss_u2) {
            ++out.n1;
            if (c1 > c2) ++hit1;
        }
    }
    if (out.n0) out.p0 = static_cast<double>(hit0) / static_cast<double>(out.n0);
    if (out.n1) out.p1 = static_cast<double>(hit1) / static_cast<double>(out.n1);
    return out;
}

double wilcoxon_signed_rank(const std::vector<double>& paired_differences) {
    std::vector<double> diffs;
    for (double d : paired_differences) {
        if (!std::isfinite(d)) throw DataError("non-finite paired difference");
        if (d != 0.0) diffs.push_back(d);
    }
    const std::size_t n = diffs.size();
    if (n == 0) return 1.0;

    // Mid-ranks of |d|; doubled so tied ranks stay integral.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
    std::vector<long> rank2(n, 0);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        // Ranks i+1 .. j, mid-rank doubled: (i+1 + j).
        const long r2 = static_cast<long>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) rank2[order[k]] = r2;
        tie_sizes.push_back(j - i);
        i = j;
    }

    long w2 = 0;  // 2 * W+
    for (std::size_t i = 0; i < n; ++i)
        if (diffs[i] > 0.0) w2 += rank2[i];
    const long s2 = static_cast<long>(n * (n + 1));  // 2 * sum of ranks
    const long mu2 = s2 / 2;                         // 2 * E[W+], integral

    if (n <= 25) {
        // Exact null distribution of 2*W+ by subset-sum counting.
        std::vector<double> counts(static_cast<std::size_t>(s2) + 1, 0.0);
        counts[0] = 1.0;
        long reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const long r = rank2[i];
            for (long s = reach; s >= 0; --s)
                if (counts[static_cast<std::size_t>(s)] > 0.0)
                    counts[static_cast<std::size_t>(s + r)] +=
                        counts[static_cast<std::size_t>(s)];
            reach += r;
        }
        const long dev = std::abs(w2 - mu2);
        double extreme = 0.0, total = 0.0;
        for (long s = 0; s <= s2; ++s) {
            const double c = counts[static_cast<std::size_t>(s)];
            total += c;
            if (std::abs(s - mu2) >= dev) extreme += c;
        }
        return extreme / total;
    }

    const double nd = static_cast<double>(n);
    double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
    for (std::size_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        var -= (td * td * td - td) / 48.0;
    }
    if (var <= 0.0) return 1.0;
    const double dev = std::abs(static_cast<double>(w2) / 2.0 - static_cast<double>(mu2) / 2.0);
    const double z = std::max(0.0, dev - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace tailrank
