#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailrank/click_sim.hpp"
#include "tailrank/corpus.hpp"

namespace tailrank {

struct BetaPrior {
    double alpha = 1.0;
    double beta = 1.0;

    // Posterior mode of Beta(alpha + pos, beta + neg); Beta(1,1) degenerates
    // to the sample mean, empty evidence falls back to 0.5.
    double map_estimate(double positives, double total) const;
    double mode() const { return map_estimate(0.0, 0.0); }
    double log_density(double p) const;  // unnormalized
};

struct DbnFitConfig {
    BetaPrior prior_a;
    BetaPrior prior_s;
    // When gamma_fixed is set the grid is ignored; otherwise gamma is picked
    // by held-out log-likelihood over the grid.
    std::optional<double> gamma_fixed;
    std::vector<double> gamma_grid{0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
    double heldout_fraction = 0.2;  // used only for grid selection
    double tol = 1e-6;              // relative objective change
    int max_iter = 200;

    void validate() const;
};

struct UrlEstimate {
    double a = 0.5;
    double s = 0.5;
};

struct DbnEstimate {
    // query -> url -> estimates
    std::map<std::string, std::map<std::string, UrlEstimate>> entries;
    std::map<std::string, std::size_t> sessions_per_query;
    double gamma = 1.0;
    double prior_mode_a = 0.5;
    double final_objective = 0.0;
    int max_iterations_used = 0;
    // Per-query MAP objective trace, one value per EM iteration.
    std::map<std::string, std::vector<double>> objective_trace;

    const UrlEstimate* find(const std::string& query, const std::string& url) const;
    // a_hat, falling back to the prior mode for unseen (query, url) pairs.
    double attractiveness(const std::string& query, const std::string& url) const;
};

// P(E_i = 1 | clicks) per position, forward-backward over the
// examination chain. Throws NumericError on a zero-probability session.
std::vector<double> posterior_examination(const DbnQueryParams& params,
                                          std::span<const uint8_t> clicks);

DbnEstimate fit_dbn(const std::vector<Session>& sessions, const DbnFitConfig& config);

double heldout_loglik(const DbnEstimate& estimate, const std::vector<Session>& sessions);

void save_dbn(const std::string& path, const DbnEstimate& estimate);
DbnEstimate load_dbn(const std::string& path);

}  // namespace tailrank
