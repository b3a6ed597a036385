#include "tailrank/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailrank/config.hpp"
#include "tailrank/corpus.hpp"
#include "tailrank/dbn_em.hpp"
#include "tailrank/eval.hpp"
#include "tailrank/features.hpp"
#include "tailrank/gbrank.hpp"
#include "tailrank/protocol.hpp"
#include "tailrank/ranking.hpp"
#include "tailrank/synth.hpp"

using nlohmann::json;

namespace tailrank {

namespace {

namespace fs = std::filesystem;

struct RunContext {
    RunConfig config;
    std::string command;
    std::map<std::string, uint64_t> input_hashes;

    std::string path(const std::string& key) const {
        return config.get_string("paths." + key);
    }
    std::string path(const std::string& key, const std::string& fallback) const {
        return config.get_string("paths." + key, fallback);
    }

    // Records the input hash and verifies lineage when the input was
    // produced by an earlier subcommand (a sibling manifest exists).
    void register_input(const std::string& p) {
        const uint64_t h = fnv1a64(read_file(p));
        input_hashes[p] = h;
        const std::string manifest_path = p + ".manifest.json";
        if (!fs::exists(manifest_path)) return;
        json m = json::parse(read_file(manifest_path), nullptr, false);
        if (m.is_discarded() || !m.contains("output_hash"))
            throw DataError("unreadable manifest: " + manifest_path);
        if (m["output_hash"].get<std::string>() != hex64(h))
            throw DataError("lineage broken: " + p + " no longer matches its manifest");
    }

    void write_manifest(const std::string& output_path) const {
        json m;
        m["command"] = command;
        m["seed"] = config.seed();
        m["config_hash"] = hex64(config.content_hash());
        json inputs = json::object();
        for (const auto& [p, h] : input_hashes) inputs[p] = hex64(h);
        m["inputs"] = std::move(inputs);
        m["output_hash"] = hex64(fnv1a64(read_file(output_path)));
        write_file(output_path + ".manifest.json", m.dump(2) + "\n");
    }
};

DbnFitConfig dbn_config_from(const RunConfig& cfg) {
    DbnFitConfig c;
    c.prior_a.alpha = cfg.get_double("dbn.alpha_a", 1.0);
    c.prior_a.beta = cfg.get_double("dbn.beta_a", 1.0);
    c.prior_s.alpha = cfg.get_double("dbn.alpha_s", 1.0);
    c.prior_s.beta = cfg.get_double("dbn.beta_s", 1.0);
    if (cfg.has("dbn.gamma")) c.gamma_fixed = cfg.get_double("dbn.gamma");
    c.gamma_grid = cfg.get_double_list("dbn.gamma_grid", c.gamma_grid);
    c.tol = cfg.get_double("dbn.tol", 1e-6);
    c.max_iter = static_cast<int>(cfg.get_int("dbn.max_iter", 200));
    return c;
}

GbrankConfig gbrank_config_from(const RunConfig& cfg) {
    GbrankConfig c;
    c.num_trees = static_cast<int>(cfg.get_int("gbrank.num_trees", 300));
    c.max_depth = static_cast<int>(cfg.get_int("gbrank.max_depth", 4));
    c.shrinkage = cfg.get_double("gbrank.shrinkage", 0.05);
    c.min_samples_leaf = static_cast<int>(cfg.get_int("gbrank.min_samples_leaf", 20));
    c.subsample = cfg.get_double("gbrank.subsample", 1.0);
    c.seed = cfg.seed();
    return c;
}

FeatureTable load_feature_table(const std::string& path, std::vector<std::string>& names_out) {
    const std::string content = read_file(path);
    FeatureTable table;
    std::size_t start = 0;
    bool header = true;
    std::size_t lineno = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        if (nl == std::string::npos) nl = content.size();
        std::string line = content.substr(start, nl - start);
        start = nl + 1;
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t p = 0;
        while (true) {
            auto tab = line.find('\t', p);
            cells.push_back(line.substr(p, tab == std::string::npos ? tab : tab - p));
            if (tab == std::string::npos) break;
            p = tab + 1;
        }
        if (header) {
            if (cells.size() < 3 || cells[0] != "query" || cells[1] != "url")
                throw DataError(path + ": unexpected feature header");
            names_out.assign(cells.begin() + 2, cells.end());
            header = false;
            continue;
        }
        if (cells.size() != names_out.size() + 2)
            throw DataError(path + ":" + std::to_string(lineno) + ": wrong column count");
        std::vector<double> vec;
        for (std::size_t i = 2; i < cells.size(); ++i) vec.push_back(std::stod(cells[i]));
        table[cells[0]][cells[1]] = std::move(vec);
    }
    if (header) throw DataError(path + ": empty feature file");
    return table;
}

json curve_to_json(const PrCurve& curve) {
    json points = json::array();
    for (const auto& p : curve.points)
        points.push_back({{"tau", p.tau},
                          {"precision", p.precision},
                          {"recall", p.recall},
                          {"num_predicted", p.num_predicted}});
    return points;
}

std::string curve_to_csv(const PrCurve& curve) {
    std::string out = "tau,precision,recall,num_predicted\n";
    for (const auto& p : curve.points)
        out += std::to_string(p.tau) + "," + std::to_string(p.precision) + "," +
               std::to_string(p.recall) + "," + std::to_string(p.num_predicted) + "\n";
    return out;
}

int cmd_simulate(RunContext& ctx) {
    SynthConfig sc;
    const RunConfig& cfg = ctx.config;
    sc.num_queries = static_cast<std::size_t>(cfg.get_int("simulate.num_queries", 100));
    sc.urls_per_query = static_cast<std::size_t>(cfg.get_int("simulate.urls_per_query", 10));
    sc.sessions_per_query =
        static_cast<std::size_t>(cfg.get_int("simulate.sessions_per_query", 1000));
    sc.gamma = cfg.get_double("simulate.gamma", 0.9);
    sc.a_min = cfg.get_double("simulate.a_min", 0.05);
    sc.a_max = cfg.get_double("simulate.a_max", 0.95);
    sc.s_min = cfg.get_double("simulate.s_min", 0.2);
    sc.s_max = cfg.get_double("simulate.s_max", 0.8);
    sc.link_snippets = cfg.get_bool("simulate.link_snippets", true);
    sc.link_noise = cfg.get_double("simulate.link_noise", 0.05);
    sc.emit_judgments = cfg.get_bool("simulate.emit_judgments", false);
    sc.baseline_dim = static_cast<std::size_t>(cfg.get_int("simulate.baseline_dim", 5));
    sc.baseline_noise = cfg.get_double("simulate.baseline_noise", 0.2);
    sc.seed = cfg.seed();

    const SynthCorpus corpus = generate_corpus(sc);
    save_sessions(ctx.path("sessions"), corpus.sessions);
    ctx.write_manifest(ctx.path("sessions"));
    save_planted_params(ctx.path("params"), corpus);
    ctx.write_manifest(ctx.path("params"));
    if (cfg.has("paths.snippets")) {
        save_snippets(ctx.path("snippets"), corpus.snippets);
        ctx.write_manifest(ctx.path("snippets"));
    }
    if (sc.emit_judgments) {
        save_judgments(ctx.path("judgments"), corpus.judgments);
        ctx.write_manifest(ctx.path("judgments"));
    }
    std::cerr << "simulate: " << corpus.sessions.size() << " sessions, "
              << corpus.queries.size() << " queries\n";
    return 0;
}

int cmd_fit_dbn(RunContext& ctx) {
    ctx.register_input(ctx.path("sessions"));
    const auto sessions = load_sessions(ctx.path("sessions"));
    const DbnEstimate est = fit_dbn(sessions, dbn_config_from(ctx.config));
    save_dbn(ctx.path("dbn"), est);
    ctx.write_manifest(ctx.path("dbn"));
    std::cerr << "fit-dbn: gamma=" << est.gamma << ", queries=" << est.entries.size() << "\n";
    return 0;
}

int cmd_lexicon(RunContext& ctx) {
    ctx.register_input(ctx.path("dbn"));
    ctx.register_input(ctx.path("snippets"));
    const DbnEstimate est = load_dbn(ctx.path("dbn"));
    const auto snippets = load_snippets(ctx.path("snippets"));
    const double alpha = ctx.config.get_double("lexicon.alpha", 0.05);
    const AttractiveLexicon lex = build_attractive_lexicon(lexicon_inputs(est, snippets), alpha);
    save_lexicon(ctx.path("lexicon"), lex);
    ctx.write_manifest(ctx.path("lexicon"));
    std::cerr << "lexicon: " << lex.entries.size() << " words ("
              << lex.queries_skipped << " queries skipped)\n";
    return 0;
}

int cmd_features(RunContext& ctx) {
    ctx.register_input(ctx.path("snippets"));
    const auto snippets = load_snippets(ctx.path("snippets"));
    std::map<std::string, UrlStats> stats;
    if (ctx.config.has("paths.sessions") && fs::exists(ctx.path("sessions"))) {
        ctx.register_input(ctx.path("sessions"));
        stats = build_url_stats(load_sessions(ctx.path("sessions")));
    }
    AttractiveLexicon lex;
    if (ctx.config.has("paths.lexicon") && fs::exists(ctx.path("lexicon"))) {
        ctx.register_input(ctx.path("lexicon"));
        lex = load_lexicon(ctx.path("lexicon"));
    }
    std::vector<std::tuple<std::string, std::string, SnippetFeatures>> rows;
    for (const auto& [query, by_url] : snippets) {
        const Query q = make_query(query);
        for (const auto& [url, snippet] : by_url)
            rows.emplace_back(query, url, extract_features(q, snippet, stats, lex));
    }
    save_features_tsv(ctx.path("features"), rows);
    ctx.write_manifest(ctx.path("features"));
    std::cerr << "features: " << rows.size() << " rows\n";
    return 0;
}

int cmd_train_attr(RunContext& ctx) {
    ctx.register_input(ctx.path("features"));
    ctx.register_input(ctx.path("dbn"));
    std::vector<std::string> names;
    const FeatureTable features = load_feature_table(ctx.path("features"), names);
    const DbnEstimate est = load_dbn(ctx.path("dbn"));
    const auto pairs = attractiveness_pairs(est, features);
    const TreeEnsemble model = train(pairs, gbrank_config_from(ctx.config), names);
    save_model(ctx.path("attr_model"), model);
    ctx.write_manifest(ctx.path("attr_model"));
    std::cerr << "train-attr: " << pairs.size() << " pairs, " << model.trees.size()
              << " trees, final loss " << model.training_loss.back() << "\n";
    return 0;
}

int cmd_train_rank(RunContext& ctx) {
    ctx.register_input(ctx.path("judgments"));
    ctx.register_input(ctx.path("features"));
    const auto judgments = load_judgments(ctx.path("judgments"));
    std::vector<std::string> snippet_names;
    const FeatureTable snippet_features = load_feature_table(ctx.path("features"), snippet_names);

    // Baseline feature block; [baseline_score] when no block was ingested.
    FeatureTable baseline, combined;
    std::size_t base_dim = 0;
    for (const auto& g : judgments) {
        std::vector<double> block =
            g.baseline_features.empty() ? std::vector<double>{g.baseline_score}
                                        : g.baseline_features;
        if (base_dim == 0) base_dim = block.size();
        if (block.size() != base_dim)
            throw DataError("inconsistent baseline feature dimension for query " + g.query_id);
        auto qit = snippet_features.find(g.query_id);
        if (qit == snippet_features.end() || !qit->second.count(g.url))
            throw DataError("no snippet features for " + g.query_id + " / " + g.url);
        combined[g.query_id][g.url] =
            strategy_two_features(block, qit->second.at(g.url));
        baseline[g.query_id][g.url] = std::move(block);
    }
    std::vector<std::string> base_names;
    for (std::size_t i = 0; i < base_dim; ++i) base_names.push_back("base_" + std::to_string(i));
    const auto combined_names = strategy_two_names(base_names, snippet_names);

    const GbrankConfig gc = gbrank_config_from(ctx.config);
    const TreeEnsemble f_org = train(judgment_pairs(judgments, baseline), gc, base_names);
    const TreeEnsemble f_two = train(judgment_pairs(judgments, combined), gc, combined_names);
    save_model(ctx.path("org_model"), f_org);
    ctx.write_manifest(ctx.path("org_model"));
    save_model(ctx.path("rank_model"), f_two);
    ctx.write_manifest(ctx.path("rank_model"));
    std::cerr << "train-rank: base dim " << base_dim << ", f_org trees "
              << f_org.trees.size() << ", f_II trees " << f_two.trees.size() << "\n";
    return 0;
}

// Strategy I rerank of the judgment lists with the configured lambda.
int cmd_rerank(RunContext& ctx) {
    ctx.register_input(ctx.path("judgments"));
    ctx.register_input(ctx.path("features"));
    ctx.register_input(ctx.path("attr_model"));
    const auto judgments = load_judgments(ctx.path("judgments"));
    std::vector<std::string> names;
    const FeatureTable features = load_feature_table(ctx.path("features"), names);
    const TreeEnsemble model = load_model(ctx.path("attr_model"));
    const double lambda = ctx.config.get_double("rank.lambda", 0.5);

    std::map<std::string, std::map<std::string, double>> base_scores, attr_scores;
    for (const auto& g : judgments) {
        base_scores[g.query_id][g.url] = g.baseline_score;
        attr_scores[g.query_id][g.url] = model.predict(features.at(g.query_id).at(g.url));
    }
    std::vector<RankedList> lists;
    for (const auto& [query, base] : base_scores)
        lists.push_back(strategy_one(query, base, attr_scores.at(query), lambda));
    save_reranked(ctx.path("reranked"), lists);
    ctx.write_manifest(ctx.path("reranked"));
    std::cerr << "rerank: " << lists.size() << " queries at lambda=" << lambda << "\n";
    return 0;
}

int cmd_eval(RunContext& ctx) {
    const RunConfig& cfg = ctx.config;
    json report;
    report["metadata"] = {{"seed", cfg.seed()}, {"config_hash", hex64(cfg.content_hash())}};
    report["normalization"] = "per-query min-max before lambda blending";
    const std::string csv_dir = cfg.get_string("eval.csv_dir", "");
    if (!csv_dir.empty()) fs::create_directories(csv_dir);

    // Graded-judgment ranking comparison: f_org vs strategy I sweep vs f_II.
    if (cfg.get_bool("eval.ranking", false)) {
        ctx.register_input(ctx.path("judgments"));
        ctx.register_input(ctx.path("features"));
        ctx.register_input(ctx.path("attr_model"));
        ctx.register_input(ctx.path("org_model"));
        ctx.register_input(ctx.path("rank_model"));
        const auto judgments = load_judgments(ctx.path("judgments"));
        std::vector<std::string> names;
        const FeatureTable features = load_feature_table(ctx.path("features"), names);
        const TreeEnsemble f_attr = load_model(ctx.path("attr_model"));
        const TreeEnsemble f_org = load_model(ctx.path("org_model"));
        const TreeEnsemble f_two = load_model(ctx.path("rank_model"));

        std::map<std::string, std::map<std::string, int>> grades;
        std::map<std::string, std::map<std::string, double>> base_s, attr_s, two_s;
        for (const auto& g : judgments) {
            grades[g.query_id][g.url] = g.grade;
            std::vector<double> block = g.baseline_features.empty()
                                            ? std::vector<double>{g.baseline_score}
                                            : g.baseline_features;
            base_s[g.query_id][g.url] = f_org.predict(block);
            const auto& svec = features.at(g.query_id).at(g.url);
            attr_s[g.query_id][g.url] = f_attr.predict(svec);
            two_s[g.query_id][g.url] = f_two.predict(strategy_two_features(block, svec));
        }

        auto mean_ndcg = [&](const std::map<std::string, std::map<std::string, double>>& scores,
                             std::size_t k, std::map<std::string, double>* per_query) {
            double sum = 0.0;
            for (const auto& [query, sc] : scores) {
                const RankedList list = rank_by_score(query, sc);
                std::vector<int> ordered;
                for (const auto& [url, score] : list.ranking)
                    ordered.push_back(grades.at(query).at(url));
                const double v = ndcg_at_k(ordered, k);
                if (per_query) (*per_query)[query] = v;
                sum += v;
            }
            return sum / static_cast<double>(scores.size());
        };

        const std::vector<std::size_t> ks{1, 5, 10};
        std::map<std::string, double> pq_org, pq_two;
        for (std::size_t k : ks) {
            report["ndcg"]["f_org"][std::to_string(k)] =
                mean_ndcg(base_s, k, k == 5 ? &pq_org : nullptr);
            report["ndcg"]["f_II"][std::to_string(k)] =
                mean_ndcg(two_s, k, k == 5 ? &pq_two : nullptr);
        }
        const auto lambda_grid =
            cfg.get_double_list("rank.lambda_grid", {0.0, 0.25, 0.5, 0.75, 1.0});
        for (double lambda : lambda_grid) {
            std::map<std::string, std::map<std::string, double>> blended;
            for (const auto& [query, base] : base_s) {
                const RankedList list =
                    strategy_one(query, base, attr_s.at(query), lambda);
                auto& m = blended[query];
                for (std::size_t i = 0; i < list.ranking.size(); ++i)
                    m[list.ranking[i].first] = -static_cast<double>(i);  // order as score
            }
            for (std::size_t k : ks)
                report["ndcg"]["f_I"][std::to_string(lambda)][std::to_string(k)] =
                    mean_ndcg(blended, k, nullptr);
        }
        std::vector<double> diffs;
        for (const auto& [query, v] : pq_two) diffs.push_back(v - pq_org.at(query));
        report["wilcoxon"]["f_II_vs_f_org_ndcg5_p"] = wilcoxon_signed_rank(diffs);
        json imp = json::array();
        for (const auto& [name, v] : feature_importance(f_two)) imp.push_back({name, v});
        report["feature_importance"]["f_II"] = std::move(imp);
        if (!csv_dir.empty()) {
            std::string csv = "query,ndcg5_f_org,ndcg5_f_II\n";
            for (const auto& [query, v] : pq_org)
                csv += query + "," + std::to_string(v) + "," + std::to_string(pq_two.at(query)) +
                       "\n";
            write_file(csv_dir + "/per_query_ndcg.csv", csv);
        }
    }

    // Simulated-tail attractiveness prediction: three PR curves.
    if (cfg.get_bool("eval.pr_compare", false)) {
        ctx.register_input(ctx.path("sessions"));
        ctx.register_input(ctx.path("snippets"));
        TailProtocolConfig pc;
        pc.dbn = dbn_config_from(cfg);
        pc.gbrank = gbrank_config_from(cfg);
        pc.seed = cfg.seed();
        pc.test_fraction = cfg.get_double("eval.test_fraction", 0.25);
        pc.tail_sessions = static_cast<std::size_t>(cfg.get_int("eval.tail_sessions", 10));
        pc.r_min = cfg.get_double("eval.r_min", 1.0);
        pc.r_max = cfg.get_double("eval.r_max", 100.0);
        if (cfg.has("eval.tau_grid")) pc.taus = cfg.get_double_list("eval.tau_grid");
        const auto sessions = load_sessions(ctx.path("sessions"));
        const auto snippets = load_snippets(ctx.path("snippets"));
        const TailProtocolResult r = run_tail_protocol(sessions, snippets, pc);
        report["pr_curves"]["a_tail"] = curve_to_json(r.curve_tail);
        report["pr_curves"]["f_snippet"] = curve_to_json(r.curve_snippet);
        report["pr_curves"]["f_snippet_click"] = curve_to_json(r.curve_snippet_click);
        report["pr_auc"] = {{"a_tail", r.auc_tail},
                            {"f_snippet", r.auc_snippet},
                            {"f_snippet_click", r.auc_snippet_click}};
        json imp = json::array();
        for (const auto& [name, v] : feature_importance(r.f_snippet_click))
            imp.push_back({name, v});
        report["feature_importance"]["f_snippet_click"] = std::move(imp);
        if (!csv_dir.empty()) {
            write_file(csv_dir + "/pr_a_tail.csv", curve_to_csv(r.curve_tail));
            write_file(csv_dir + "/pr_f_snippet.csv", curve_to_csv(r.curve_snippet));
            write_file(csv_dir + "/pr_f_snippet_click.csv", curve_to_csv(r.curve_snippet_click));
        }
    }

    // Missing-token / click correlation estimate over observed sessions.
    if (cfg.get_bool("eval.p0p1", false)) {
        ctx.register_input(ctx.path("sessions"));
        ctx.register_input(ctx.path("snippets"));
        const auto sessions = load_sessions(ctx.path("sessions"));
        const auto snippets = load_snippets(ctx.path("snippets"));
        std::map<std::string, std::map<std::string, std::pair<uint64_t, uint64_t>>> counts;
        for (const auto& s : sessions)
            for (std::size_t i = 0; i < s.results.size(); ++i) {
                auto& [clicks, views] = counts[s.query_id][s.results[i]];
                clicks += s.clicks[i];
                ++views;
            }
        std::vector<ClickMissTuple> tuples;
        for (const auto& [query, by_url] : counts) {
            auto sit = snippets.find(query);
            if (sit == snippets.end()) continue;
            const Query q = make_query(query);
            for (auto u1 = by_url.begin(); u1 != by_url.end(); ++u1)
                for (auto u2 = by_url.begin(); u2 != by_url.end(); ++u2) {
                    if (u1 == u2) continue;
                    auto s1 = sit->second.find(u1->first);
                    auto s2 = sit->second.find(u2->first);
                    if (s1 == sit->second.end() || s2 == sit->second.end()) continue;
                    ClickMissTuple t;
                    t.query = query;
                    t.clicks_u1 = u1->second.first;
                    t.clicks_u2 = u2->second.first;
                    t.impressions_u1 = u1->second.second;
                    t.impressions_u2 = u2->second.second;
                    t.miss_u1 = miss_count(q.tokens, s1->second.title_tokens);
                    t.miss_u2 = miss_count(q.tokens, s2->second.title_tokens);
                    tuples.push_back(std::move(t));
                }
        }
        const P0P1 res = p0_p1(tuples, cfg.get_bool("eval.click_rate", false));
        report["p0p1"]["n0"] = res.n0;
        report["p0p1"]["n1"] = res.n1;
        if (res.p0) report["p0p1"]["p0"] = *res.p0;
        if (res.p1) report["p0p1"]["p1"] = *res.p1;
    }

    write_file(ctx.path("report"), report.dump(2) + "\n");
    ctx.write_manifest(ctx.path("report"));
    std::cerr << "eval: report written to " << ctx.path("report") << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Snippet-based perceived-relevance toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int64_t seed_override = -1;

    const std::vector<std::pair<std::string, int (*)(RunContext&)>> commands = {
        {"simulate", cmd_simulate},   {"fit-dbn", cmd_fit_dbn},
        {"lexicon", cmd_lexicon},     {"features", cmd_features},
        {"train-attr", cmd_train_attr}, {"train-rank", cmd_train_rank},
        {"rerank", cmd_rerank},       {"eval", cmd_eval}};

    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "Run configuration file")->required();
        sub->add_option("--seed", seed_override, "Override the config seed");
        sub->add_option("--override", overrides, "section.key=value config override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        RunContext ctx{RunConfig::from_file(config_path), app.get_subcommands().front()->get_name(), {}};
        for (const auto& o : overrides) ctx.config.apply_override(o);
        if (seed_override >= 0) ctx.config.set_seed(static_cast<uint64_t>(seed_override));
        (void)ctx.config.seed();  // mandatory
        for (const auto& [name, fn] : commands)
            if (name == ctx.command) return fn(ctx);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace tailrank
