#include "tailrank/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tailrank/click_sim.hpp"
#include "tailrank/features.hpp"

using nlohmann::json;

namespace tailrank {

namespace {

const std::vector<std::string>& base_words() {
    static const std::vector<std::string> kWords = {
        "river",  "stone",  "meadow", "harbor", "lantern", "copper",  "violet", "ember",
        "falcon", "cedar",  "willow", "summit", "canyon",  "prairie", "marble", "juniper",
        "harvest","beacon", "timber", "saddle", "glacier", "orchid",  "anchor", "bramble",
        "cobalt", "drift",  "ferry",  "grove",  "hollow",  "island",  "jasper", "kettle",
        "ledger", "mantle", "nickel", "outpost","pebble",  "quarry",  "ridge",  "shale",
        "tundra", "upland", "vessel", "walnut", "yonder",  "zephyr",  "basin",  "cliff",
        "delta",  "estuary"};
    return kWords;
}

const std::vector<std::string>& attractive_words() {
    static const std::vector<std::string> kWords = {"official", "latest",  "breaking", "images",
                                                    "free",     "gallery", "pictures", "video",
                                                    "welcome",  "login"};
    return kWords;
}

const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> kWords = {
        "guide", "overview", "history", "review", "results", "about", "details", "archive",
        "notes", "summary",  "info",    "page",   "portal",  "index", "reading", "insight"};
    return kWords;
}

std::string capitalize(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

const std::vector<std::string>& tld_choices() {
    static const std::vector<std::string> kTlds = {"com", "com", "com", "org", "net", "edu", "info"};
    return kTlds;
}

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
    return pool[rng.next_below(pool.size())];
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& config) {
    if (config.num_queries == 0 || config.urls_per_query == 0)
        throw ConfigError("num_queries and urls_per_query must be positive");
    if (config.urls_per_query > kDefaultMaxResults)
        throw ConfigError("urls_per_query exceeds the session size cap");

    SynthCorpus corpus;
    corpus.gamma = config.gamma;
    Rng root(config.seed);

    for (std::size_t qi = 0; qi < config.num_queries; ++qi) {
        Rng qrng = root.derive(0x71, qi);
        const std::size_t qlen = 2 + qrng.next_below(3);
        std::vector<std::string> qwords;
        while (qwords.size() < qlen) {
            std::string w = pick(base_words(), qrng);
            if (std::find(qwords.begin(), qwords.end(), w) == qwords.end())
                qwords.push_back(std::move(w));
        }
        std::string raw = join_tokens(qwords) + " q" + std::to_string(qi);
        Query query = make_query(raw);
        const std::string qid = query.id;

        for (std::size_t uj = 0; uj < config.urls_per_query; ++uj) {
            Rng urng = qrng.derive(0x75, uj);
            const std::string tld = pick(tld_choices(), urng);
            std::string url = "www." + pick(base_words(), urng) + std::to_string(qi) + "x" +
                              std::to_string(uj) + "." + tld + "/" + pick(filler_words(), urng);
            if (urng.bernoulli(0.4)) url += "/" + pick(filler_words(), urng);

            // Title: a controlled share of query tokens, maybe an attractive
            // word, plus filler.
            const double match_level = urng.next_double();
            std::vector<std::string> title_words;
            std::size_t included = 0;
            for (const auto& w : qwords)
                if (urng.next_double() < match_level) {
                    title_words.push_back(capitalize(w));
                    ++included;
                }
            const bool has_attr = urng.bernoulli(0.35);
            if (has_attr) title_words.push_back(capitalize(pick(attractive_words(), urng)));
            const std::size_t fillers = 2 + urng.next_below(3);
            for (std::size_t f = 0; f < fillers; ++f)
                title_words.push_back(urng.bernoulli(0.5) ? capitalize(pick(filler_words(), urng))
                                                          : pick(filler_words(), urng));
            std::string title = join_tokens(title_words);

            // Abstract: 2-3 period-separated segments.
            std::string abstract_text;
            const std::size_t nseg = 2 + urng.next_below(2);
            for (std::size_t sg = 0; sg < nseg; ++sg) {
                std::vector<std::string> seg_words;
                for (std::size_t f = 0; f < 4 + urng.next_below(4); ++f)
                    seg_words.push_back(pick(filler_words(), urng));
                for (const auto& w : qwords)
                    if (urng.next_double() < match_level * 0.6) seg_words.push_back(w);
                if (sg) abstract_text += " ";
                abstract_text += capitalize(join_tokens(seg_words)) + ".";
            }

            Snippet snippet = make_snippet(url, title, abstract_text);

            // The "qN" disambiguation token never occurs in titles, so the
            // match fraction is taken over the real query words only.
            const std::size_t missing = miss_count(query.tokens, snippet.title_tokens);
            const double match_frac =
                static_cast<double>(qwords.size() + 1 - missing) /
                static_cast<double>(qwords.size());
            double a;
            if (config.link_snippets) {
                const double url_len = std::clamp(static_cast<double>(url.size()) / 60.0, 0.0, 1.0);
                a = 0.08 + 0.62 * match_frac + 0.18 * (has_attr ? 1.0 : 0.0) - 0.08 * url_len +
                    urng.uniform(-config.link_noise, config.link_noise);
                a = std::clamp(a, 0.02, 0.98);
            } else {
                a = urng.uniform(config.a_min, config.a_max);
            }
            const double s = urng.uniform(config.s_min, config.s_max);

            corpus.snippets[qid][url] = std::move(snippet);
            corpus.planted_a[qid][url] = a;
            corpus.planted_s[qid][url] = s;

            if (config.emit_judgments) {
                const double latent_base = urng.next_double();
                const double snippet_sig =
                    0.7 * match_frac + 0.3 * (has_attr ? 1.0 : 0.0);
                const double rel =
                    std::clamp(0.5 * latent_base + 0.5 * snippet_sig + urng.uniform(-0.05, 0.05),
                               0.0, 1.0);
                GradedJudgment g;
                g.query_id = qid;
                g.url = url;
                g.grade = std::min(4, static_cast<int>(rel * 5.0));
                g.baseline_score =
                    latent_base + urng.uniform(-config.baseline_noise, config.baseline_noise);
                for (std::size_t d = 0; d + 1 < config.baseline_dim; ++d)
                    g.baseline_features.push_back(latent_base + urng.uniform(-0.25, 0.25));
                g.baseline_features.push_back(urng.next_double());  // pure noise column
                corpus.judgments.push_back(std::move(g));
            }
        }
        corpus.queries.push_back(std::move(query));
    }

    // Sessions: per-session url permutation, clicks drawn from the planted
    // parameters; substreams keyed by (query, session) for reproducibility.
    for (std::size_t qi = 0; qi < config.num_queries; ++qi) {
        const std::string& qid = corpus.queries[qi].id;
        std::vector<std::string> urls;
        for (const auto& [url, a] : corpus.planted_a[qid]) urls.push_back(url);
        for (std::size_t t = 0; t < config.sessions_per_query; ++t) {
            Rng srng = root.derive(0x5e55, qi * 1000003ULL + t);
            std::vector<std::string> order = urls;
            for (std::size_t i = 0; i + 1 < order.size(); ++i)
                std::swap(order[i], order[i + srng.next_below(order.size() - i)]);
            DbnQueryParams params;
            params.gamma = config.gamma;
            for (const auto& url : order) {
                params.attractiveness.push_back(corpus.planted_a[qid][url]);
                params.satisfaction.push_back(corpus.planted_s[qid][url]);
            }
            Session session;
            session.query_id = qid;
            session.results = std::move(order);
            session.clicks = simulate_clicks(params, srng);
            corpus.sessions.push_back(std::move(session));
        }
    }
    return corpus;
}

void save_planted_params(const std::string& path, const SynthCorpus& corpus) {
    json queries = json::object();
    for (const auto& [qid, by_url] : corpus.planted_a) {
        json urls = json::object();
        for (const auto& [url, a] : by_url)
            urls[url] = {{"a", a}, {"s", corpus.planted_s.at(qid).at(url)}};
        queries[qid] = std::move(urls);
    }
    json j;
    j["gamma"] = corpus.gamma;
    j["queries"] = std::move(queries);
    write_file(path, j.dump(2) + "\n");
}

}  // namespace tailrank
