#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tailrank/common.hpp"

namespace tailrank {

struct PreferencePair {
    std::vector<double> hi;  // should score higher
    std::vector<double> lo;
    double margin = 0.0;     // target score gap, >= 0
};

struct GbrankConfig {
    int num_trees = 300;
    int max_depth = 4;
    double shrinkage = 0.05;
    int min_samples_leaf = 20;
    double subsample = 1.0;  // fraction of pairs per iteration; 1 = all
    uint64_t seed = 0;

    void validate() const;
};

struct RegressionTree {
    struct Split {
        int feature = 0;
        double threshold = 0.0;
        // Child >= 0 indexes splits; child < 0 is a leaf: index = -(child+1).
        int left = 0;
        int right = 0;
    };
    std::vector<Split> splits;
    std::vector<double> leaves;

    double predict(std::span<const double> x) const;
};

struct TreeEnsemble {
    std::vector<RegressionTree> trees;
    std::vector<double> weights;  // one per tree
    std::vector<std::string> feature_names;
    std::vector<double> split_gains;      // SSE reduction accumulated per feature
    std::vector<double> training_loss;    // pairwise loss per accepted iteration

    std::size_t dimension() const { return feature_names.size(); }
    double predict(std::span<const double> x) const;
};

// Fits the squared-hinge pairwise objective
//   sum max(0, margin - (f(hi) - f(lo)))^2
// by iteratively fitting trees to pseudo-targets on the violated pairs,
// with the averaging update f_t = (t f_{t-1} + eta g_t) / (t + 1).
TreeEnsemble train(const std::vector<PreferencePair>& pairs, const GbrankConfig& config,
                   const std::vector<std::string>& feature_names);

// Normalized to sum 1; descending importance, ties by feature index.
std::vector<std::pair<std::string, double>> feature_importance(const TreeEnsemble& ensemble);

void save_model(const std::string& path, const TreeEnsemble& ensemble);
TreeEnsemble load_model(const std::string& path);

}  // namespace tailrank
