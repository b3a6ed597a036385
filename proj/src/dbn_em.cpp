#include "tailrank/dbn_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

using nlohmann::json;

namespace tailrank {

namespace {
constexpr double kProbClamp = 1e-9;

double clamp01(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }
}  // namespace

double BetaPrior::map_estimate(double positives, double total) const {
    const double num = positives + alpha - 1.0;
    const double den = total + alpha + beta - 2.0;
    if (den <= 0.0) return 0.5;
    return std::clamp(num / den, 0.0, 1.0);
}

double BetaPrior::log_density(double p) const {
    p = clamp01(p);
    return (alpha - 1.0) * std::log(p) + (beta - 1.0) * std::log1p(-p);
}

void DbnFitConfig::validate() const {
    if (prior_a.alpha <= 0 || prior_a.beta <= 0 || prior_s.alpha <= 0 || prior_s.beta <= 0)
        throw ConfigError("Beta prior hyperparameters must be positive");
    if (tol <= 0) throw ConfigError("tol must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    auto check_gamma = [](double g) {
        if (g < 0.0 || g > 1.0) throw ConfigError("gamma outside [0,1]");
    };
    if (gamma_fixed) {
        check_gamma(*gamma_fixed);
    } else {
        if (gamma_grid.empty()) throw ConfigError("empty gamma grid");
        for (double g : gamma_grid) check_gamma(g);
    }
    if (heldout_fraction <= 0.0 || heldout_fraction >= 1.0)
        throw ConfigError("heldout_fraction must be in (0,1)");
}

const UrlEstimate* DbnEstimate::find(const std::string& query, const std::string& url) const {
    auto qit = entries.find(query);
    if (qit == entries.end()) return nullptr;
    auto uit = qit->second.find(url);
    if (uit == qit->second.end()) return nullptr;
    return &uit->second;
}

double DbnEstimate::attractiveness(const std::string& query, const std::string& url) const {
    const UrlEstimate* e = find(query, url);
    return e ? e->a : prior_mode_a;
}

namespace {

struct ChainPosteriors {
    double loglik = 0.0;
    std::vector<double> p_examined;   // P(E_i=1 | clicks)
    std::vector<double> p_satisfied;  // valid where clicks[i]==1
};

// Forward-backward over the binary examination chain.
ChainPosteriors chain_posteriors(const DbnQueryParams& params, std::span<const uint8_t> clicks) {
    const std::size_t k = params.size();
    if (clicks.size() != k) throw DataError("session length does not match parameters");
    const double g = params.gamma;

    auto emit1 = [&](std::size_t i) {
        return clicks[i] ? params.attractiveness[i] : 1.0 - params.attractiveness[i];
    };
    auto emit0 = [&](std::size_t i) { return clicks[i] ? 0.0 : 1.0; };
    auto cont = [&](std::size_t i) {
        return clicks[i] ? (1.0 - params.satisfaction[i]) * g : g;
    };

    // beta[i][e] = P(c_i..c_{K-1} | E_i = e); beta[k] = {1, 1}.
    std::vector<double> beta1(k + 1, 1.0), beta0(k + 1, 1.0);
    for (std::size_t ii = k; ii-- > 0;) {
        beta1[ii] = emit1(ii) * (cont(ii) * beta1[ii + 1] + (1.0 - cont(ii)) * beta0[ii + 1]);
        beta0[ii] = emit0(ii) * beta0[ii + 1];
    }

    ChainPosteriors out;
    const double lik = beta1[0];  // E_0 = 1 by assumption
    if (lik <= 0.0)
        throw NumericError("zero-probability session under the current parameters");
    out.loglik = std::log(lik);
    out.p_examined.resize(k);
    out.p_satisfied.assign(k, 0.0);

    // Forward pass: alpha[e] = P(E_i = e, c_0..c_{i-1}).
    double alpha1 = 1.0, alpha0 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double j1 = alpha1 * beta1[i];
        const double j0 = alpha0 * beta0[i];
        out.p_examined[i] = j1 / (j1 + j0);
        if (clicks[i]) {
            const double s = params.satisfaction[i];
            const double num = s * beta0[i + 1];
            const double den = num + (1.0 - s) * (g * beta1[i + 1] + (1.0 - g) * beta0[i + 1]);
            out.p_satisfied[i] = den > 0.0 ? num / den : 0.0;
        }
        const double e1 = alpha1 * emit1(i);
        const double e0 = alpha0 * emit0(i);
        alpha1 = e1 * cont(i);
        alpha0 = e1 * (1.0 - cont(i)) + e0;
    }
    return out;
}

struct UrlAccum {
    double sum_a = 0.0;
    double cnt_a = 0.0;
    double sum_s = 0.0;
    double cnt_s = 0.0;
};

struct QueryFit {
    std::map<std::string, UrlEstimate> urls;
    std::vector<double> trace;
    int iterations = 0;
};

QueryFit fit_query(const std::vector<const Session*>& sessions, double gamma,
                   const DbnFitConfig& config) {
    QueryFit fit;
    for (const Session* s : sessions)
        for (const auto& url : s->results) fit.urls.try_emplace(url);

    double prev_obj = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.max_iter; ++iter) {
        std::map<std::string, UrlAccum> accum;
        double loglik = 0.0;
        for (const Session* s : sessions) {
            DbnQueryParams params;
            params.gamma = gamma;
            params.attractiveness.reserve(s->results.size());
            params.satisfaction.reserve(s->results.size());
            for (const auto& url : s->results) {
                const UrlEstimate& e = fit.urls[url];
                params.attractiveness.push_back(clamp01(e.a));
                params.satisfaction.push_back(clamp01(e.s));
            }
            ChainPosteriors post = chain_posteriors(params, s->clicks);
            loglik += post.loglik;
            for (std::size_t i = 0; i < s->results.size(); ++i) {
                UrlAccum& acc = accum[s->results[i]];
                if (s->clicks[i]) {
                    acc.sum_a += 1.0;
                    acc.sum_s += post.p_satisfied[i];
                    acc.cnt_s += 1.0;
                } else {
                    // A_i is free when the position went unexamined.
                    acc.sum_a += (1.0 - post.p_examined[i]) * params.attractiveness[i];
                }
                acc.cnt_a += 1.0;
            }
        }
        double objective = loglik;
        for (const auto& [url, e] : fit.urls)
            objective += config.prior_a.log_density(e.a) + config.prior_s.log_density(e.s);
        if (!std::isfinite(objective))
            throw NumericError("non-finite EM objective at iteration " + std::to_string(iter));
        fit.trace.push_back(objective);
        fit.iterations = iter + 1;
        if (iter > 0 && objective - prev_obj < config.tol * (std::abs(prev_obj) + 1.0)) break;
        prev_obj = objective;

        for (auto& [url, e] : fit.urls) {
            const UrlAccum& acc = accum[url];
            e.a = config.prior_a.map_estimate(acc.sum_a, acc.cnt_a);
            e.s = acc.cnt_s > 0.0 || config.prior_s.alpha + config.prior_s.beta > 2.0
                      ? config.prior_s.map_estimate(acc.sum_s, acc.cnt_s)
                      : config.prior_s.mode();
        }
    }
    return fit;
}

std::map<std::string, std::vector<const Session*>> group_by_query(
    const std::vector<Session>& sessions) {
    std::map<std::string, std::vector<const Session*>> by_query;
    for (const auto& s : sessions) by_query[s.query_id].push_back(&s);
    return by_query;
}

DbnEstimate fit_with_gamma(const std::map<std::string, std::vector<const Session*>>& by_query,
                           double gamma, const DbnFitConfig& config) {
    DbnEstimate est;
    est.gamma = gamma;
    est.prior_mode_a = config.prior_a.mode();
    for (const auto& [query, qsessions] : by_query) {
        QueryFit fit = fit_query(qsessions, gamma, config);
        est.entries[query] = std::move(fit.urls);
        est.sessions_per_query[query] = qsessions.size();
        est.final_objective += fit.trace.back();
        est.max_iterations_used = std::max(est.max_iterations_used, fit.iterations);
        est.objective_trace[query] = std::move(fit.trace);
    }
    return est;
}

}  // namespace

std::vector<double> posterior_examination(const DbnQueryParams& params,
                                          std::span<const uint8_t> clicks) {
    params.validate();
    return chain_posteriors(params, clicks).p_examined;
}

DbnEstimate fit_dbn(const std::vector<Session>& sessions, const DbnFitConfig& config) {
    config.validate();
    if (sessions.empty()) throw DataError("no sessions to fit");
    auto by_query = group_by_query(sessions);

    double gamma;
    if (config.gamma_fixed) {
        gamma = *config.gamma_fixed;
    } else {
        // Deterministic split: every n-th session per query is held out.
        const std::size_t stride =
            std::max<std::size_t>(2, static_cast<std::size_t>(1.0 / config.heldout_fraction));
        std::map<std::string, std::vector<const Session*>> train_by_query;
        std::vector<Session> heldout;
        for (const auto& [query, qsessions] : by_query) {
            for (std::size_t i = 0; i < qsessions.size(); ++i) {
                if (qsessions.size() >= 2 && i % stride == stride - 1)
                    heldout.push_back(*qsessions[i]);
                else
                    train_by_query[query].push_back(qsessions[i]);
            }
        }
        if (heldout.empty()) {
            gamma = config.gamma_grid.front();
        } else {
            double best_ll = -std::numeric_limits<double>::infinity();
            gamma = config.gamma_grid.front();
            for (double g : config.gamma_grid) {
                DbnEstimate cand = fit_with_gamma(train_by_query, g, config);
                const double ll = heldout_loglik(cand, heldout);
                if (ll > best_ll) {
                    best_ll = ll;
                    gamma = g;
                }
            }
        }
    }
    return fit_with_gamma(by_query, gamma, config);
}

double heldout_loglik(const DbnEstimate& estimate, const std::vector<Session>& sessions) {
    if (sessions.empty()) throw DataError("no sessions for held-out evaluation");
    double total = 0.0;
    for (const auto& s : sessions) {
        DbnQueryParams params;
        params.gamma = estimate.gamma;
        for (const auto& url : s.results) {
            const UrlEstimate* e = estimate.find(s.query_id, url);
            params.attractiveness.push_back(clamp01(e ? e->a : estimate.prior_mode_a));
            params.satisfaction.push_back(clamp01(e ? e->s : 0.5));
        }
        total += session_log_likelihood(params, s.clicks);
    }
    return total / static_cast<double>(sessions.size());
}

void save_dbn(const std::string& path, const DbnEstimate& estimate) {
    json j;
    j["gamma"] = estimate.gamma;
    j["prior_mode_a"] = estimate.prior_mode_a;
    json entries = json::array();
    for (const auto& [query, by_url] : estimate.entries) {
        const auto sit = estimate.sessions_per_query.find(query);
        const std::size_t nsessions = sit == estimate.sessions_per_query.end() ? 0 : sit->second;
        for (const auto& [url, e] : by_url) {
            entries.push_back({{"query", query},
                               {"url", url},
                               {"a", e.a},
                               {"s", e.s},
                               {"sessions", nsessions}});
        }
    }
    j["entries"] = std::move(entries);
    write_file(path, j.dump(2) + "\n");
}

DbnEstimate load_dbn(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("gamma") || !j.contains("entries"))
        throw DataError("malformed DBN model file: " + path);
    DbnEstimate est;
    est.gamma = j["gamma"].get<double>();
    if (j.contains("prior_mode_a")) est.prior_mode_a = j["prior_mode_a"].get<double>();
    for (const auto& e : j["entries"]) {
        const std::string query = e.at("query").get<std::string>();
        const std::string url = e.at("url").get<std::string>();
        est.entries[query][url] = UrlEstimate{e.at("a").get<double>(), e.at("s").get<double>()};
        est.sessions_per_query[query] = e.at("sessions").get<std::size_t>();
    }
    return est;
}

}  // namespace tailrank
