#include "tailrank/gbrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tailrank/rng.hpp"

using nlohmann::json;

namespace tailrank {

void GbrankConfig::validate() const {
    if (num_trees < 1) throw ConfigError("num_trees must be at least 1");
    if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
    if (shrinkage <= 0.0 || shrinkage > 1.0) throw ConfigError("shrinkage outside (0,1]");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
    if (subsample <= 0.0 || subsample > 1.0) throw ConfigError("subsample outside (0,1]");
}

double RegressionTree::predict(std::span<const double> x) const {
    if (splits.empty()) return leaves.empty() ? 0.0 : leaves[0];
    int node = 0;
    for (;;) {
        const Split& s = splits[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(s.feature)] <= s.threshold ? s.left : s.right;
        if (node < 0) return leaves[static_cast<std::size_t>(-(node + 1))];
    }
}

double TreeEnsemble::predict(std::span<const double> x) const {
    if (x.size() != dimension()) throw DataError("feature dimension mismatch");
    double score = 0.0;
    for (std::size_t t = 0; t < trees.size(); ++t) score += weights[t] * trees[t].predict(x);
    return score;
}

namespace {

struct TreeBuilder {
    const std::vector<std::vector<double>>& xs;
    const std::vector<double>& targets;
    int max_depth;
    int min_leaf;
    std::size_t dim;
    RegressionTree tree;
    std::vector<double>& gains;  // per feature, accumulated across splits

    // Returns an encoded child reference for the node over `idx`.
    int build(std::vector<std::size_t>& idx, int depth) {
        double sum = 0.0;
        for (std::size_t i : idx) sum += targets[i];
        const double mean = sum / static_cast<double>(idx.size());

        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 0.0;
        if (depth < max_depth && idx.size() >= static_cast<std::size_t>(2 * min_leaf)) {
            double sse = 0.0;
            for (std::size_t i : idx) sse += (targets[i] - mean) * (targets[i] - mean);
            std::vector<std::size_t> order(idx);
            for (std::size_t feat = 0; feat < dim; ++feat) {
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (xs[a][feat] != xs[b][feat]) return xs[a][feat] < xs[b][feat];
                    return a < b;
                });
                double lsum = 0.0, lsq = 0.0;
                double tsum = 0.0, tsq = 0.0;
                for (std::size_t i : order) {
                    tsum += targets[i];
                    tsq += targets[i] * targets[i];
                }
                for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                    const double t = targets[order[k]];
                    lsum += t;
                    lsq += t * t;
                    const double xv = xs[order[k]][feat];
                    const double xn = xs[order[k + 1]][feat];
                    if (xv == xn) continue;
                    const std::size_t nl = k + 1, nr = order.size() - nl;
                    if (nl < static_cast<std::size_t>(min_leaf) ||
                        nr < static_cast<std::size_t>(min_leaf))
                        continue;
                    const double rsum = tsum - lsum, rsq = tsq - lsq;
                    const double sse_l = lsq - lsum * lsum / static_cast<double>(nl);
                    const double sse_r = rsq - rsum * rsum / static_cast<double>(nr);
                    const double gain = sse - sse_l - sse_r;
                    // Strict '>' keeps the lowest (feature, threshold) on ties.
                    if (gain > best_gain + 1e-12) {
                        best_gain = gain;
                        best_feature = static_cast<int>(feat);
                        best_threshold = (xv + xn) / 2.0;
                    }
                }
            }
        }

        if (best_feature < 0) {
            tree.leaves.push_back(mean);
            return -static_cast<int>(tree.leaves.size());  // -(index+1)
        }

        gains[static_cast<std::size_t>(best_feature)] += best_gain;
        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (xs[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const std::size_t self = tree.splits.size();
        tree.splits.push_back({best_feature, best_threshold, 0, 0});
        tree.splits[self].left = build(left, depth + 1);
        tree.splits[self].right = build(right, depth + 1);
        return static_cast<int>(self);
    }
};

double pairwise_loss(const std::vector<PreferencePair>& pairs,
                     const std::vector<double>& score_hi, const std::vector<double>& score_lo) {
    double loss = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double v = pairs[i].margin - (score_hi[i] - score_lo[i]);
        if (v > 0.0) loss += v * v;
    }
    return loss;
}

}  // namespace

TreeEnsemble train(const std::vector<PreferencePair>& pairs, const GbrankConfig& config,
                   const std::vector<std::string>& feature_names) {
    config.validate();
    if (pairs.empty()) throw DataError("no preference pairs to train on");
    const std::size_t dim = feature_names.size();
    for (const auto& p : pairs) {
        if (p.hi.size() != dim || p.lo.size() != dim)
            throw DataError("preference pair dimension mismatch");
        if (!(p.margin >= 0.0)) throw DataError("negative or non-finite pair margin");
        auto finite = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        };
        if (!finite(p.hi) || !finite(p.lo)) throw DataError("non-finite feature value");
    }

    TreeEnsemble ens;
    ens.feature_names = feature_names;
    ens.split_gains.assign(dim, 0.0);

    std::vector<double> score_hi(pairs.size(), 0.0), score_lo(pairs.size(), 0.0);
    std::vector<uint8_t> degenerate(pairs.size(), 0);
    for (std::size_t i = 0; i < pairs.size(); ++i)
        degenerate[i] = pairs[i].hi == pairs[i].lo ? 1 : 0;

    Rng rng(config.seed);
    ens.training_loss.push_back(pairwise_loss(pairs, score_hi, score_lo));

    for (int t = 1; t <= config.num_trees; ++t) {
        const double prev_loss = ens.training_loss.back();
        if (prev_loss <= 0.0) break;

        std::vector<std::vector<double>> xs;
        std::vector<double> targets;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (degenerate[i]) continue;
            if (config.subsample < 1.0 && !rng.bernoulli(config.subsample)) continue;
            if (score_hi[i] - score_lo[i] >= pairs[i].margin) continue;
            xs.push_back(pairs[i].hi);
            targets.push_back(score_lo[i] + pairs[i].margin);
            xs.push_back(pairs[i].lo);
            targets.push_back(score_hi[i] - pairs[i].margin);
        }
        if (xs.empty()) break;

        std::vector<double> gains(dim, 0.0);
        TreeBuilder builder{xs, targets, config.max_depth, config.min_samples_leaf, dim, {}, gains};
        std::vector<std::size_t> all(xs.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        builder.build(all, 0);

        // Candidate scores under f_t = (t f_{t-1} + eta g_t) / (t + 1).
        const double td = static_cast<double>(ens.trees.size() + 1);
        std::vector<double> cand_hi(pairs.size()), cand_lo(pairs.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            cand_hi[i] = (td * score_hi[i] + config.shrinkage * builder.tree.predict(pairs[i].hi)) /
                         (td + 1.0);
            cand_lo[i] = (td * score_lo[i] + config.shrinkage * builder.tree.predict(pairs[i].lo)) /
                         (td + 1.0);
        }
        const double cand_loss = pairwise_loss(pairs, cand_hi, cand_lo);
        if (cand_loss > prev_loss + 1e-12) break;  // step would not improve the fit

        ens.trees.push_back(std::move(builder.tree));
        for (std::size_t f = 0; f < dim; ++f) ens.split_gains[f] += gains[f];
        score_hi = std::move(cand_hi);
        score_lo = std::move(cand_lo);
        ens.training_loss.push_back(cand_loss);
    }

    // The averaging update leaves every tree with the same final weight.
    const double w = config.shrinkage / static_cast<double>(ens.trees.size() + 1);
    ens.weights.assign(ens.trees.size(), w);
    return ens;
}

std::vector<std::pair<std::string, double>> feature_importance(const TreeEnsemble& ensemble) {
    const std::size_t dim = ensemble.dimension();
    std::vector<double> gains = ensemble.split_gains;
    gains.resize(dim, 0.0);
    const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (gains[a] != gains[b]) return gains[a] > gains[b];
        return a < b;
    });
    std::vector<std::pair<std::string, double>> out;
    out.reserve(dim);
    for (std::size_t f : order)
        out.emplace_back(ensemble.feature_names[f], total > 0.0 ? gains[f] / total : 0.0);
    return out;
}

void save_model(const std::string& path, const TreeEnsemble& ensemble) {
    json j;
    j["weights"] = ensemble.weights;
    j["features"] = ensemble.feature_names;
    j["split_gains"] = ensemble.split_gains;
    json trees = json::array();
    for (const auto& tree : ensemble.trees) {
        json splits = json::array();
        for (const auto& s : tree.splits)
            splits.push_back(
                {{"feat", s.feature}, {"thr", s.threshold}, {"left", s.left}, {"right", s.right}});
        trees.push_back({{"splits", std::move(splits)}, {"leaves", tree.leaves}});
    }
    j["trees"] = std::move(trees);
    write_file(path, j.dump(2) + "\n");
}

TreeEnsemble load_model(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("trees") || !j.contains("weights") ||
        !j.contains("features"))
        throw DataError("malformed model file: " + path);
    TreeEnsemble ens;
    ens.weights = j["weights"].get<std::vector<double>>();
    ens.feature_names = j["features"].get<std::vector<std::string>>();
    if (j.contains("split_gains")) ens.split_gains = j["split_gains"].get<std::vector<double>>();
    ens.split_gains.resize(ens.feature_names.size(), 0.0);
    for (const auto& tj : j["trees"]) {
        RegressionTree tree;
        for (const auto& sj : tj.at("splits"))
            tree.splits.push_back({sj.at("feat").get<int>(), sj.at("thr").get<double>(),
                                   sj.at("left").get<int>(), sj.at("right").get<int>()});
        tree.leaves = tj.at("leaves").get<std::vector<double>>();
        for (const auto& s : tree.splits) {
            if (s.feature < 0 || static_cast<std::size_t>(s.feature) >= ens.feature_names.size())
                throw DataError("split feature index out of range in " + path);
        }
        ens.trees.push_back(std::move(tree));
    }
    if (ens.weights.size() != ens.trees.size())
        throw DataError("weights/trees length mismatch in " + path);
    return ens;
}

}  // namespace tailrank
