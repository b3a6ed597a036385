#include "tailrank/click_sim.hpp"

#include <cmath>
#include <limits>

namespace tailrank {

void DbnQueryParams::validate() const {
    if (attractiveness.size() != satisfaction.size())
        throw DataError("attractiveness/satisfaction length mismatch");
    if (attractiveness.empty()) throw DataError("empty parameter lists");
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    for (double a : attractiveness)
        if (!in_unit(a)) throw DataError("attractiveness outside [0,1]");
    for (double s : satisfaction)
        if (!in_unit(s)) throw DataError("satisfaction outside [0,1]");
    if (!in_unit(gamma)) throw DataError("gamma outside [0,1]");
}

double cascade_click_prob(std::span<const double> attractiveness, std::size_t rank) {
    if (rank >= attractiveness.size()) throw DataError("rank out of range");
    double p = attractiveness[rank];
    for (std::size_t u = 0; u < rank; ++u) p *= 1.0 - attractiveness[u];
    return p;
}

std::vector<uint8_t> simulate_clicks(const DbnQueryParams& params, Rng& rng) {
    params.validate();
    const std::size_t k = params.size();
    std::vector<uint8_t> clicks(k, 0);
    bool examined = true;
    for (std::size_t i = 0; i < k && examined; ++i) {
        bool attracted = rng.bernoulli(params.attractiveness[i]);
        bool clicked = attracted;
        clicks[i] = clicked ? 1 : 0;
        bool satisfied = clicked && rng.bernoulli(params.satisfaction[i]);
        examined = !satisfied && rng.bernoulli(params.gamma);
    }
    return clicks;
}

namespace {

// Depth-first over the generative branch points; probability mass for a
// finished path lands on its click bitmask. Once examination stops the
// remaining clicks are all zero.
void enumerate_rec(const DbnQueryParams& p, std::size_t i, uint32_t mask, double prob,
                   std::vector<double>& out) {
    if (prob == 0.0) return;
    if (i == p.size()) {
        out[mask] += prob;
        return;
    }
    const double a = p.attractiveness[i];
    const double s = p.satisfaction[i];
    const double g = p.gamma;
    // Not attracted: no click, continue examining w.p. gamma.
    if (1.0 - a > 0.0) {
        enumerate_rec(p, i + 1, mask, prob * (1.0 - a) * g, out);
        out[mask] += prob * (1.0 - a) * (1.0 - g);
    }
    // Attracted and clicked.
    if (a > 0.0) {
        const uint32_t m = mask | (1u << i);
        // Satisfied: examination ends.
        out[m] += prob * a * s;
        // Unsatisfied: continue w.p. gamma.
        if (1.0 - s > 0.0) {
            enumerate_rec(p, i + 1, m, prob * a * (1.0 - s) * g, out);
            out[m] += prob * a * (1.0 - s) * (1.0 - g);
        }
    }
}

}  // namespace

std::vector<double> enumerate_click_distribution(const DbnQueryParams& params) {
    params.validate();
    const std::size_t k = params.size();
    if (k > kMaxEnumerationPositions)
        throw DataError("enumeration capped at K=" + std::to_string(kMaxEnumerationPositions));
    std::vector<double> out(std::size_t{1} << k, 0.0);
    enumerate_rec(params, 0, 0, 1.0, out);
    return out;
}

double session_log_likelihood(const DbnQueryParams& params, std::span<const uint8_t> clicks) {
    params.validate();
    const std::size_t k = params.size();
    if (clicks.size() != k) throw DataError("session length does not match parameters");
    // Forward over the examination chain: alpha[e] = P(E_i = e, c_1..c_{i-1}).
    double alpha1 = 1.0, alpha0 = 0.0;
    double loglik = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double a = params.attractiveness[i];
        const double s = params.satisfaction[i];
        const double g = params.gamma;
        const bool c = clicks[i] != 0;
        const double emit1 = c ? a : 1.0 - a;
        const double emit0 = c ? 0.0 : 1.0;
        const double j1 = alpha1 * emit1;  // P(E_i=1, c_1..c_i)
        const double j0 = alpha0 * emit0;
        const double norm = j1 + j0;
        if (norm <= 0.0) return -std::numeric_limits<double>::infinity();
        loglik += std::log(norm);
        // Continue-examination probability from an examined position.
        const double cont = c ? (1.0 - s) * g : g;
        alpha1 = (j1 / norm) * cont;
        alpha0 = (j1 / norm) * (1.0 - cont) + (j0 / norm);
    }
    return loglik;
}

}  // namespace tailrank
