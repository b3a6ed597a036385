#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tailrank/common.hpp"
#include "tailrank/corpus.hpp"
#include "tailrank/rng.hpp"

namespace tailrank {

// Per-query generative parameters. attractiveness[i] / satisfaction[i]
// belong to the url shown at rank i (0-based).
struct DbnQueryParams {
    std::vector<double> attractiveness;
    std::vector<double> satisfaction;
    double gamma = 1.0;

    void validate() const;
    std::size_t size() const { return attractiveness.size(); }
};

// Cascade model click probability at 0-based rank:
// a_i * prod_{u<i} (1 - a_u).
double cascade_click_prob(std::span<const double> attractiveness, std::size_t rank);

// One draw from the generative model. Examination starts at rank 0;
// after an unsatisfying step the user continues with probability gamma,
// examination never resumes once it stops.
std::vector<uint8_t> simulate_clicks(const DbnQueryParams& params, Rng& rng);

// Exact click-vector distribution, indexed by bitmask (bit i = click at
// rank i). Brute-force recursion over the hidden attract/satisfy/examine
// branches; independent of the chain recursion in session_log_likelihood.
// K capped at 12.
std::vector<double> enumerate_click_distribution(const DbnQueryParams& params);

inline constexpr std::size_t kMaxEnumerationPositions = 12;

// Log-probability of an observed click vector, linear-time forward
// recursion over the examination chain. Impossible observations yield
// -infinity.
double session_log_likelihood(const DbnQueryParams& params, std::span<const uint8_t> clicks);

}  // namespace tailrank
