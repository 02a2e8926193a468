// kg: command-line front end for the knowledge-graph pipeline.
//
// exit codes: 0 ok, 1 runtime error, 2 usage, 3 privacy gate violation

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <provgraph/eutils.hpp>
#include <provgraph/http_provider.hpp>
#include <provgraph/pipeline.hpp>

namespace fs = std::filesystem;
using namespace provgraph;

namespace {

constexpr int kExitPrivacy = 3;

struct Globals {
    std::string pair = "dmd_bmd";
    std::string config;
    std::string data_dir = PROVGRAPH_DATA_DIR;
    bool offline = false;
    bool strict_privacy = false;
    std::string log_level = "warn";
};

DiseasePairConfig pair_config(const Globals &g) {
    return load_config_file(g.config.empty() ? g.data_dir + "/pairs/" + g.pair + ".yaml" : g.config);
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path &p, const std::string &s) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << s;
}

void emit(const std::string &out_path, const std::string &s) {
    if (out_path.empty() || out_path == "-")
        std::cout << s;
    else
        write_file(out_path, s);
}

// "echo" and "rule" are in-process; "fixture:<path>" replays; anything else is an HTTP provider id
std::unique_ptr<ModelProvider> make_provider(const std::string &spec, const Globals &g, const std::string &fixture_id = "") {
    if (spec == "echo") return std::make_unique<EchoSynthesisProvider>();
    if (spec == "rule") return std::make_unique<RuleJudge>();
    if (starts_with(spec, "fixture:")) {
        auto path = spec.substr(8);
        return FixtureProvider::from_file(fixture_id.empty() ? fs::path(path).stem().string() : fixture_id, path);
    }
    if (g.offline) throw ConfigError("--offline", "provider '" + spec + "' needs the network; use echo, rule or fixture:<path>");
    return HttpProvider::from_env(spec);
}

std::string edges_jsonl(const std::vector<Edge> &edges) {
    std::string s;
    for (auto &e : edges) s += to_json(e).dump() + "\n";
    return s;
}

std::string output_stem(const std::string &scenario_id, Arm a) { return scenario_id + "__" + arm_name(a); }

struct LoadedOutput {
    std::string scenario_id;
    Arm arm;
    std::string text;
    std::string path;
};

// <scenario_id>__<arm>.md files in a directory
std::vector<LoadedOutput> load_outputs(const std::string &dir) {
    std::vector<LoadedOutput> out;
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
    for (auto &ent : fs::directory_iterator(dir)) {
        if (ent.path().extension() != ".md") continue;
        auto stem = ent.path().stem().string();
        auto sep = stem.rfind("__");
        if (sep == std::string::npos) continue;
        out.push_back({stem.substr(0, sep), parse_arm(stem.substr(sep + 2)), slurp(ent.path().string()), ent.path().string()});
    }
    std::sort(out.begin(), out.end(), [](auto &a, auto &b) { return a.path < b.path; });
    return out;
}

std::unique_ptr<PubMedClient> make_pubmed(const Globals &g, const std::string &index, bool live, const std::string &cache,
                                          std::unique_ptr<FixtureIndex> &cache_holder, SteadyClock &clock) {
    if (!live || g.offline) {
        if (index.empty()) throw ConfigError("--index", "offline audit needs a PubMed fixture index");
        return std::make_unique<FixtureIndex>(index);
    }
    cache_holder = cache.empty() || !fs::exists(cache) ? std::make_unique<FixtureIndex>() : std::make_unique<FixtureIndex>(cache);
    return std::make_unique<LiveClient>(https_esummary_fetch(), clock, cache_holder.get(), cache);
}

PrivacyGate make_gate(const Globals &g, const std::map<std::string, std::string> &endpoints) {
    PrivacyConfig pc;
    pc.endpoints = endpoints;
    return PrivacyGate(pc, g.strict_privacy);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"knowledge-graph grounded clinical synthesis toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--pair", g.pair, "disease pair id (mg_lems, dmd_bmd, cidp_gbs)");
    app.add_option("--config", g.config, "pair YAML (defaults to <data-dir>/pairs/<pair>.yaml)");
    app.add_option("--data-dir", g.data_dir, "data directory");
    app.add_flag("--offline", g.offline, "fixture mode everywhere; no network");
    app.add_flag("--strict-privacy", g.strict_privacy, "refuse non-local synthesis and judge endpoints");
    app.add_option("--log-level", g.log_level, "debug|info|warn|error");

    // build
    auto *build = app.add_subcommand("build", "Phase I: screen, extract, normalise, merge, tier, integrate");
    std::string corpus, tier1_path, graph_out, report_out;
    std::vector<std::string> extractors, fixtures;
    build->add_option("--corpus", corpus, "abstracts JSONL")->required();
    build->add_option("--extractor", extractors, "provider ids (HTTP) or fixture:<path>")->required();
    build->add_option("--fixture-ids", fixtures, "provider ids to read from fixture files (one per --extractor)");
    build->add_option("--tier1", tier1_path, "curated backbone JSONL");
    build->add_option("--out", graph_out, "graph JSONL")->required();
    build->add_option("--report", report_out, "stage report JSON");

    // query
    auto *query = app.add_subcommand("query", "run Q1-Q4 against a graph");
    std::vector<std::string> graphs;
    std::string qname, disease, entity;
    size_t qlimit = kNeighbourhoodLimit;
    query->add_option("--graph", graphs, "graph JSONL files")->required();
    query->add_option("--query", qname, "Q1|Q2|Q3|Q4")->required()->check(CLI::IsMember({"Q1", "Q2", "Q3", "Q4"}));
    query->add_option("--disease", disease, "disease short name");
    query->add_option("--entity", entity, "Q4 entity name or CUI");
    query->add_option("--limit", qlimit, "Q4 result cap");

    // synthesize
    auto *synth = app.add_subcommand("synthesize", "Phase II: one output per (scenario, arm)");
    std::string scenarios_path, scenario_id, arm_opt = "all", out_dir, synth_provider = "echo", rag_corpus;
    synth->add_option("--graph", graphs, "graph JSONL files");
    synth->add_option("--scenarios", scenarios_path, "scenario JSON")->required();
    synth->add_option("--scenario-id", scenario_id, "single scenario (default: all)");
    synth->add_option("--arm", arm_opt, "vanilla|guideline_rag|heg_tkg|all");
    synth->add_option("--provider", synth_provider, "echo, fixture:<path> or HTTP provider id");
    synth->add_option("--rag-corpus", rag_corpus, "abstracts JSONL indexed for the guideline_rag arm");
    synth->add_option("--out-dir", out_dir, "output directory")->required();

    // audit
    auto *audit = app.add_subcommand("audit", "citation audit of outputs against PubMed");
    std::string outputs_dir, index_path, cache_path, audit_out;
    bool live = false, title_only = false, per_output = false;
    audit->add_option("--outputs", outputs_dir, "directory of <scenario>__<arm>.md")->required();
    audit->add_option("--index", index_path, "PubMed fixture index JSON");
    audit->add_flag("--live", live, "query E-utilities (rate limited)");
    audit->add_option("--cache", cache_path, "live-mode cache file");
    audit->add_flag("--title-only", title_only, "relevance from titles only");
    audit->add_flag("--per-output", per_output, "print the per-output audit report");
    audit->add_option("--out", audit_out, "summary table path");

    // metrics
    auto *metrics = app.add_subcommand("metrics", "FC / ETS / PG per scenario");
    std::string reference_csv, metrics_out;
    metrics->add_option("--outputs", outputs_dir, "directory of outputs");
    metrics->add_option("--scenarios", scenarios_path, "scenario JSON");
    metrics->add_option("--reference", reference_csv, "recompute PG from a published FC/ETS table");
    metrics->add_option("--out", metrics_out, "CSV path");

    // judge
    auto *judge = app.add_subcommand("judge", "blinded LLM-judge scoring and aggregation");
    std::string round_opt = "v1", scores_out;
    std::vector<std::string> judges, score_files;
    uint64_t seed = 42;
    judge->add_option("--round", round_opt, "v1|v2")->check(CLI::IsMember({"v1", "v2"}));
    judge->add_option("--outputs", outputs_dir, "directory of outputs to score");
    judge->add_option("--scenarios", scenarios_path, "scenario JSON");
    judge->add_option("--judge", judges, "rule, fixture:<path> or HTTP provider ids");
    judge->add_option("--index", index_path, "PubMed fixture index (v2 audits)");
    judge->add_option("--scores-out", scores_out, "score JSONL");
    judge->add_option("--aggregate", score_files, "score JSONL files to aggregate");
    judge->add_option("--seed", seed, "blinding seed");

    // nli-audit
    auto *nli = app.add_subcommand("nli-audit", "claim-support audit: sample, judge, aggregate");
    std::string candidates_out, candidates_in, patterns_path, verdicts_in, nli_judge_spec, abstracts_path;
    size_t nli_n = 200, nli_floor = 12, nli_cap = 5;
    nli->add_option("--outputs", outputs_dir, "HEG-TKG outputs to mine for (claim, PMID) pairs");
    nli->add_option("--candidates-out", candidates_out, "write extracted candidate pairs");
    nli->add_option("--candidates", candidates_in, "candidate pairs JSONL to sample from");
    nli->add_option("--patterns", patterns_path, "meta-commentary patterns file");
    nli->add_option("--n", nli_n, "sample size");
    nli->add_option("--floor", nli_floor, "per-cell floor");
    nli->add_option("--cap", nli_cap, "per-PMID cap");
    nli->add_option("--seed", seed, "sampling seed");
    nli->add_option("--judge", nli_judge_spec, "NLI judge provider");
    nli->add_option("--abstracts", abstracts_path, "abstracts JSONL for the judged PMIDs");
    nli->add_option("--verdicts", verdicts_in, "verdict JSONL to aggregate");

    // counterfactual
    auto *cf = app.add_subcommand("counterfactual", "injected-error harness");
    std::string cases_path, cf_out;
    cf->add_option("--cases", cases_path, "counterfactual cases JSON")->required();
    cf->add_option("--graph", graphs, "graph JSONL files")->required();
    cf->add_option("--scenarios", scenarios_path, "scenario JSON")->required();
    cf->add_option("--provider", synth_provider, "synthesis provider");
    cf->add_option("--corpus", corpus, "abstracts JSONL (marker collision check)");
    cf->add_option("--out-dir", out_dir, "write injected outputs here");
    cf->add_option("--out", cf_out, "table path");

    // stats
    auto *stats_cmd = app.add_subcommand("stats", "graph statistics per pair");
    std::vector<std::string> pair_graphs;
    std::string stats_out;
    stats_cmd->add_option("--graph", pair_graphs, "<pair>=<graph.jsonl> (repeatable)")->required();
    stats_cmd->add_option("--out", stats_out, "table path");

    // export
    auto *exp = app.add_subcommand("export", "Cypher import script");
    std::string export_out;
    exp->add_option("--graph", graphs, "graph JSONL files")->required();
    exp->add_option("--out", export_out, "script path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    static const std::map<std::string, LogLevel> levels = {
        {"debug", LogLevel::Debug}, {"info", LogLevel::Info}, {"warn", LogLevel::Warn}, {"error", LogLevel::Error}};
    if (auto it = levels.find(g.log_level); it != levels.end()) log_level() = it->second;

    try {
        if (build->parsed()) {
            auto cfg = pair_config(g);
            std::vector<std::unique_ptr<ModelProvider>> owned;
            std::vector<ModelProvider *> ps;
            for (size_t i = 0; i < extractors.size(); ++i) {
                owned.push_back(make_provider(extractors[i], g, i < fixtures.size() ? fixtures[i] : ""));
                ps.push_back(owned.back().get());
            }
            std::vector<Edge> t1;
            if (!tier1_path.empty()) {
                auto chain = ResolverChain::standard(cfg);
                t1 = load_tier1(tier1_path, &chain);
            }
            auto r = run_phase1(cfg, load_corpus(corpus), ps, std::move(t1));
            auto edges = r.graph.edges();
            std::sort(edges.begin(), edges.end(), [](auto &a, auto &b) { return a.edge_id < b.edge_id; });
            write_file(graph_out, edges_jsonl(edges));
            auto rep = r.report.to_json().dump(2) + "\n";
            if (report_out.empty())
                std::cerr << rep;
            else
                write_file(report_out, rep);
            return 0;
        }

        if (query->parsed()) {
            auto cfg = pair_config(g);
            auto gr = load_graph(graphs);
            std::vector<Edge> res;
            if (qname == "Q4") {
                if (entity.empty()) throw ConfigError("--entity", "required for Q4");
                std::optional<std::string> d;
                if (!disease.empty()) d = disease;
                res = query_neighbourhood(gr, entity, std::nullopt, d, qlimit);
            } else {
                if (disease.empty()) throw ConfigError("--disease", "required for " + qname);
                res = qname == "Q1" ? query_comparative(gr, disease, cfg)
                      : qname == "Q2" ? query_temporal(gr, disease, cfg)
                                      : query_treatment(gr, disease, cfg);
            }
            std::cout << edges_jsonl(res);
            return 0;
        }

        if (synth->parsed()) {
            auto cfg = pair_config(g);
            auto gr = load_graph(graphs);
            auto provider = make_provider(synth_provider, g);
            auto gate = make_gate(g, {{"synthesis", provider->endpoint_host()}});
            std::unique_ptr<RagIndex> rag;
            if (!rag_corpus.empty()) rag = std::make_unique<RagIndex>(documents_from_corpus(load_corpus(rag_corpus)));
            std::vector<Arm> arms = arm_opt == "all" ? kArms : std::vector<Arm>{parse_arm(arm_opt)};
            Phase2Options opt;
            opt.rag = rag.get();
            size_t written = 0;
            for (auto &s : load_scenarios(scenarios_path)) {
                if (!scenario_id.empty() && s.id != scenario_id) continue;
                for (auto a : arms) {
                    auto r = run_phase2(gr, cfg, s, a, *provider, gate, opt);
                    auto stem = fs::path(out_dir) / output_stem(s.id, a);
                    write_file(stem.string() + ".md", r.output.text);
                    auto side = manifest_json(r.output);
                    side["queries"] = r.retrieval.queries;
                    write_file(stem.string() + ".manifest.json", side.dump(2) + "\n");
                    ++written;
                }
            }
            if (!written) throw Error("no scenario matched");
            return 0;
        }

        if (audit->parsed()) {
            auto cfg = pair_config(g);
            std::unique_ptr<FixtureIndex> cache;
            SteadyClock clock;
            auto client = make_pubmed(g, index_path, live, cache_path, cache, clock);
            std::map<Arm, CitationAudit> per_arm;
            for (auto &o : load_outputs(outputs_dir)) {
                auto a = audit_text(output_stem(o.scenario_id, o.arm), o.text, cfg, *client, title_only);
                if (per_output) std::cout << "### " << a.output_id << "\n" << render_audit_report(a) << "\n";
                auto &agg = per_arm[o.arm];
                agg.output_id = arm_name(o.arm);
                for (auto &v : a.verdicts) {
                    if (std::find(agg.pmids.begin(), agg.pmids.end(), v.pmid) != agg.pmids.end()) continue;
                    agg.pmids.push_back(v.pmid);
                    agg.verdicts.push_back(v);
                    agg.relevant += v.verdict == Verdict::Relevant;
                    agg.wrong_field += v.verdict == Verdict::WrongField;
                    agg.not_found += v.verdict == Verdict::NotFound;
                }
            }
            std::vector<std::pair<std::string, CitationAudit>> rows;
            for (auto a : kArms)
                if (per_arm.count(a)) rows.push_back({arm_name(a), per_arm[a]});
            emit(audit_out, render_audit_summary(rows));
            return 0;
        }

        if (metrics->parsed()) {
            std::string csv = metrics_table_header();
            if (!reference_csv.empty()) {
                for (auto row : load_scenario_metrics(reference_csv)) {
                    for (auto a : kArms) {
                        auto &t = row.arm(a);
                        t.pg = provenance_gap(t.fc, t.ets, reliability_coefficient(a));
                    }
                    csv += metrics_table_row(row);
                }
            } else {
                if (outputs_dir.empty() || scenarios_path.empty())
                    throw ConfigError("--outputs", "metrics needs --outputs and --scenarios, or --reference");
                std::map<std::string, ScenarioMetricsRow> rows;
                std::map<std::string, ClinicalScenario> scen;
                for (auto &s : load_scenarios(scenarios_path)) scen[s.id] = s;
                for (auto &o : load_outputs(outputs_dir)) {
                    auto it = scen.find(o.scenario_id);
                    if (it == scen.end()) throw Error("output for unknown scenario " + o.scenario_id);
                    auto m = compute_metrics(o.text, it->second.expected_key_features, o.arm);
                    auto &row = rows[o.scenario_id];
                    row.scenario_id = o.scenario_id;
                    row.type = it->second.output_type;
                    row.arm(o.arm) = {m.fc, m.ets, m.pg};
                }
                for (auto &[id, r] : rows) csv += metrics_table_row(r);
            }
            emit(metrics_out, csv);
            return 0;
        }

        if (judge->parsed()) {
            if (!score_files.empty()) {
                std::vector<ScoreRecord> scores;
                for (auto &f : score_files)
                    for (auto &j : read_jsonl(f)) scores.push_back(score_from_json(j));
                auto t = aggregate_panel(scores);
                for (auto &p : t.pairs) std::cout << "## " << p << "\n" << render_panel_table(t, p) << "\n";
                return 0;
            }
            if (outputs_dir.empty() || scenarios_path.empty() || judges.empty())
                throw ConfigError("--judge", "scoring needs --outputs, --scenarios and at least one --judge");
            auto cfg = pair_config(g);
            auto round = parse_round(round_opt);
            std::map<std::string, ClinicalScenario> scen;
            for (auto &s : load_scenarios(scenarios_path)) scen[s.id] = s;
            std::vector<JudgeCase> cases;
            std::map<std::string, std::string> texts;
            for (auto &o : load_outputs(outputs_dir)) {
                auto it = scen.find(o.scenario_id);
                if (it == scen.end()) throw Error("output for unknown scenario " + o.scenario_id);
                cases.push_back({o.scenario_id, o.arm, it->second.scenario_text, o.text});
            }
            auto [blind, key] = blind_and_shuffle(cases, seed);
            std::unique_ptr<FixtureIndex> idx;
            if (round == Round::v2) {
                if (index_path.empty()) throw ConfigError("--index", "v2 judging needs a PubMed index for the audit");
                idx = std::make_unique<FixtureIndex>(index_path);
            }
            std::map<std::string, std::string> endpoints;
            std::vector<std::unique_ptr<ModelProvider>> js;
            for (auto &spec : judges) {
                js.push_back(make_provider(spec, g));
                endpoints["judge:" + js.back()->id()] = js.back()->endpoint_host();
            }
            auto gate = make_gate(g, endpoints);
            std::string out;
            size_t unscored = 0;
            for (auto &j : js) {
                gate.check("judge", j->endpoint_host());
                for (auto &c : blind) {
                    std::optional<CitationAudit> a;
                    if (idx) a = audit_text(c.blind_id, c.output_text, cfg, *idx);
                    auto s = judge_case(c, round, a ? &*a : nullptr, *j);
                    if (!s) {
                        ++unscored;
                        continue;
                    }
                    auto &[sid, arm] = key.at(c.blind_id);
                    ScoreRecord r{cfg.pair_id, sid, arm, j->id(), round, s->d};
                    out += to_json(r).dump() + "\n";
                }
            }
            if (unscored) log(LogLevel::Warn, std::to_string(unscored) + " cases left unscored");
            emit(scores_out, out);
            return 0;
        }

        if (nli->parsed()) {
            if (!verdicts_in.empty()) {
                std::vector<NliVerdict> vs;
                for (auto &j : read_jsonl(verdicts_in)) vs.push_back(verdict_from_json(j));
                std::cout << render_nli_summary(aggregate_nli(vs, seed));
                return 0;
            }
            std::vector<ClaimPair> pairs;
            if (!candidates_in.empty()) {
                for (auto &j : read_jsonl(candidates_in)) pairs.push_back(claim_from_json(j));
            } else {
                if (outputs_dir.empty()) throw ConfigError("--outputs", "need --outputs, --candidates or --verdicts");
                std::vector<ScenarioText> texts;
                for (auto &o : load_outputs(outputs_dir))
                    if (o.arm == Arm::heg_tkg) texts.push_back({o.scenario_id, g.pair, o.text});
                size_t filtered = 0;
                pairs = extract_claims(texts, patterns_path.empty() ? default_meta_patterns() : load_patterns(patterns_path),
                                       &filtered);
                log(LogLevel::Info, std::to_string(filtered) + " meta-commentary sentences filtered");
                if (!candidates_out.empty()) {
                    std::string s;
                    for (auto &p : pairs) s += to_json(p).dump() + "\n";
                    write_file(candidates_out, s);
                }
            }
            auto rep = stratified_sample(pairs, nli_n, seed, nli_floor, nli_cap);
            if (nli_judge_spec.empty()) {
                for (auto &p : rep.sample) std::cout << to_json(p).dump() << "\n";
                return 0;
            }
            auto judge_p = make_provider(nli_judge_spec, g);
            make_gate(g, {}).check("judge", judge_p->endpoint_host());
            std::map<std::string, Abstract> abs;
            if (!abstracts_path.empty())
                for (auto &a : load_corpus(abstracts_path)) abs[a.pmid] = a;
            std::vector<NliVerdict> vs;
            for (auto &p : rep.sample) {
                auto it = abs.find(p.pmid);
                auto v = nli_judge(p, it == abs.end() ? "" : it->second.title, it == abs.end() ? "" : it->second.text,
                                   *judge_p);
                if (v) {
                    vs.push_back(*v);
                    std::cout << to_json(*v).dump() << "\n";
                }
            }
            std::cerr << render_nli_summary(aggregate_nli(vs, seed));
            return 0;
        }

        if (cf->parsed()) {
            auto cfg = pair_config(g);
            auto gr = load_graph(graphs);
            auto provider = make_provider(synth_provider, g);
            auto gate = make_gate(g, {{"synthesis", provider->endpoint_host()}});
            std::set<std::string> corpus_pmids = gr.all_pmids();
            if (!corpus.empty())
                for (auto &a : load_corpus(corpus)) corpus_pmids.insert(a.pmid);
            std::map<std::string, ClinicalScenario> scen;
            for (auto &s : load_scenarios(scenarios_path)) scen[s.id] = s;
            std::vector<CfResult> results;
            for (auto &c : load_counterfactuals(cases_path)) {
                auto it = scen.find(c.scenario_id);
                if (it == scen.end()) throw Error("counterfactual " + c.id + ": unknown scenario " + c.scenario_id);
                Phase2Options opt;
                opt.evidence_hook = [&](std::vector<Edge> ev) { return inject_counterfactual(std::move(ev), c, corpus_pmids); };
                auto r = run_phase2(gr, cfg, it->second, Arm::heg_tkg, *provider, gate, opt);
                if (!out_dir.empty()) write_file(fs::path(out_dir) / (c.id + ".md"), r.output.text);
                results.push_back(classify_cf_outcome(r.output, c));
            }
            emit(cf_out, render_cf_table(results));
            return 0;
        }

        if (stats_cmd->parsed()) {
            std::vector<PairStats> rows;
            for (auto &spec : pair_graphs) {
                auto eq = spec.find('=');
                if (eq == std::string::npos) throw ConfigError("--graph", "expected <pair>=<path>, got " + spec);
                rows.push_back({spec.substr(0, eq), graph_stats(load_graph({spec.substr(eq + 1)}))});
            }
            emit(stats_out, render_kg_stats(rows));
            return 0;
        }

        if (exp->parsed()) {
            emit(export_out, export_import_script(load_graph(graphs)));
            return 0;
        }
    } catch (const PrivacyError &e) {
        std::cerr << "privacy gate: " << e.what() << "\n";
        return kExitPrivacy;
    } catch (const StageError &e) {
        std::cerr << "stage " << e.stage << " failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
