#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tailrank/corpus.hpp"
#include "tailrank/rng.hpp"

namespace tailrank {

struct SynthConfig {
    std::size_t num_queries = 100;
    std::size_t urls_per_query = 10;
    std::size_t sessions_per_query = 1000;
    double gamma = 0.9;
    double a_min = 0.05, a_max = 0.95;  // used when link_snippets is off
    double s_min = 0.2, s_max = 0.8;
    // Planted attractiveness becomes a noisy monotone function of the
    // title-match / attractive-word / url-length snippet signals.
    bool link_snippets = true;
    double link_noise = 0.05;
    bool emit_judgments = false;
    std::size_t baseline_dim = 5;
    double baseline_noise = 0.2;
    uint64_t seed = 1;
};

struct SynthCorpus {
    std::vector<Query> queries;
    std::map<std::string, std::map<std::string, Snippet>> snippets;
    std::map<std::string, std::map<std::string, double>> planted_a;
    std::map<std::string, std::map<std::string, double>> planted_s;
    double gamma = 0.9;
    std::vector<Session> sessions;
    std::vector<GradedJudgment> judgments;
};

SynthCorpus generate_corpus(const SynthConfig& config);

// Ground-truth params.json: {"gamma": g, "queries": {query: {url: {a, s}}}}.
void save_planted_params(const std::string& path, const SynthCorpus& corpus);

}  // namespace tailrank
