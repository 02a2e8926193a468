#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "citeverify.hpp"
#include "consensus.hpp"
#include "evalmetrics.hpp"
#include "extraction.hpp"
#include "graphstore.hpp"
#include "judgepanel.hpp"
#include "normalize.hpp"
#include "pairconfig.hpp"
#include "synthesis.hpp"
#include "temporal.hpp"

namespace provgraph {

struct StageError : Error {
    std::string stage;
    StageError(std::string s, const std::string &msg) : Error(s + ": " + msg), stage(std::move(s)) {}
};

// ---- Phase I ----

struct Phase1Report {
    size_t abstracts = 0, screened_in = 0, screened_out = 0;
    ExtractionStats extraction;
    size_t triplets_kept = 0, rules_fired = 0, temporal_triplets = 0, anchors_resolved = 0;
    size_t tier2_edges = 0, absorbed = 0, discarded = 0, tier1_edges = 0;
    std::map<std::string, size_t> rule_counts;
    std::map<std::string, size_t> tier_histogram;
    size_t nodes = 0, edges = 0;
    std::vector<std::string> merge_messages;
    std::vector<Discard> discards;

    json to_json() const {
        json rules = json::object();
        for (auto &[k, v] : rule_counts) rules[k] = v;
        json tiers = json::object();
        for (auto t : {"GOLD", "SILVER", "BRONZE"}) tiers[t] = tier_histogram.count(t) ? tier_histogram.at(t) : 0;
        json disc = json::array();
        for (auto &d : discards) disc.push_back(json{{"edge_id", d.edge_id}, {"tier1_edge_id", d.tier1_edge_id}, {"reason", d.reason}});
        return json{{"abstracts", abstracts},
                    {"screen_pass", screened_in},
                    {"screen_reject", screened_out},
                    {"screen_pass_rate", abstracts ? double(screened_in) / double(abstracts) : 0.0},
                    {"triplets_returned", extraction.returned},
                    {"dropped_invalid_quote", extraction.dropped_quote},
                    {"flagged_out_of_schema", extraction.flagged_predicate},
                    {"provider_failures", extraction.provider_failures},
                    {"triplets_kept", triplets_kept},
                    {"rules_fired", rules_fired},
                    {"rule_counts", rules},
                    {"temporal_triplets", temporal_triplets},
                    {"anchors_resolved", anchors_resolved},
                    {"tier1_edges", tier1_edges},
                    {"tier2_edges", tier2_edges},
                    {"absorbed_into_tier1", absorbed},
                    {"discarded_conflicts", discarded},
                    {"conflicts", disc},
                    {"tier_histogram", tiers},
                    {"nodes", nodes},
                    {"edges", edges}};
    }
};

struct Phase1Result {
    Graph graph;
    Phase1Report report;
};

struct Phase1Options {
    ModelProvider *screener = nullptr;  // defaults to the first extraction provider
    const ResolverChain *chain = nullptr;
    ConflictTable conflicts;
};

inline std::optional<TemporalAnchor> anchor_for(const Triplet &t, const DiseasePairConfig &cfg) {
    auto a = resolve_temporal(t.temporal_phrase.value_or(t.evidence_quote), cfg);
    if (!a.resolved() && t.temporal_phrase) {
        auto b = resolve_temporal(t.evidence_quote, cfg);
        if (b.resolved()) return b;
    }
    return a;
}

inline Phase1Result run_phase1(const DiseasePairConfig &cfg, std::vector<Abstract> corpus,
                               const std::vector<ModelProvider *> &providers, std::vector<Edge> tier1 = {},
                               const Phase1Options &opt = {}) {
    Phase1Result res;
    auto &rep = res.report;
    if (corpus.empty()) throw StageError("screening", "empty corpus");
    if (providers.empty()) throw StageError("extraction", "no extraction providers");
    std::sort(corpus.begin(), corpus.end(), [](auto &a, auto &b) { return a.pmid < b.pmid; });
    rep.abstracts = corpus.size();

    std::vector<Abstract> kept;
    auto *screener = opt.screener ? opt.screener : providers.front();
    try {
        for (auto &a : corpus) {
            if (screen_relevance(a, cfg, *screener).pass)
                kept.push_back(a);
            else
                ++rep.screened_out;
        }
    } catch (const Error &e) {
        throw StageError("screening", e.what());
    }
    rep.screened_in = kept.size();

    std::vector<std::pair<RawTriplet, const Abstract *>> raw;
    try {
        for (auto &a : kept)
            for (auto &t : extract_triplets(a, cfg, providers, &rep.extraction)) raw.push_back({t, &a});
    } catch (const Error &e) {
        throw StageError("extraction", e.what());
    }

    const ResolverChain chain = opt.chain ? *opt.chain : ResolverChain::standard(cfg);
    const std::set<std::string> temporal(cfg.temporal_predicates.begin(), cfg.temporal_predicates.end());
    std::map<std::string, std::vector<Triplet>> groups;
    try {
        for (auto &[rt, ab] : raw) {
            auto t = normalize_triplet(rt, chain);
            auto cr = apply_correction_rules(t);
            t = cr.triplet;
            rep.rules_fired += cr.fired.size();
            for (auto &id : cr.fired) ++rep.rule_counts[id];
            t.disease_context = classify_disease_context(t.subject.surface + " " + t.object.surface, cfg);
            if (t.disease_context.empty()) t.disease_context = classify_disease_context(ab->title + " " + ab->text, cfg);
            if (temporal.count(t.predicate)) {
                ++rep.temporal_triplets;
                t.anchor = anchor_for(t, cfg);
                if (t.anchor->resolved()) ++rep.anchors_resolved;
            }
            groups[edge_key(t)].push_back(std::move(t));
            ++rep.triplets_kept;
        }
    } catch (const Error &e) {
        throw StageError("normalization", e.what());
    }

    std::vector<Edge> tier2;
    MergeLog mlog;
    for (auto &[key, g] : groups) {
        bool is_t = temporal.count(g.front().predicate) > 0;
        tier2.push_back(assign_tier(merge_group(g, is_t, &mlog), {}));
    }
    rep.merge_messages = mlog.messages;
    rep.tier2_edges = tier2.size();
    rep.tier1_edges = tier1.size();

    Integrated in;
    try {
        in = integrate_tiers(std::move(tier1), tier2, opt.conflicts);
    } catch (const Error &e) {
        throw StageError("integration", e.what());
    }
    rep.absorbed = in.absorbed;
    rep.discarded = in.discarded.size();
    rep.discards = in.discarded;

    res.graph = Graph(std::move(in.edges));
    for (auto &e : res.graph.edges()) ++rep.tier_histogram[tier_name(e.tier)];
    rep.nodes = res.graph.nodes().size();
    rep.edges = res.graph.edges().size();
    return res;
}

// ---- privacy gate: decided once, immutable afterwards ----

class PrivacyGate {
public:
    PrivacyGate(PrivacyConfig cfg, bool strict) : cfg_(std::move(cfg)), strict_(strict) {
        warnings_ = validate_privacy_config(cfg_, strict_);
    }
    // components not declared at startup are checked against the same allowlist
    void check(const std::string &component, const std::string &host) const {
        if (is_local_host(cfg_, host)) return;
        auto msg = component + " endpoint " + host + " is not a local host; patient data would leave the machine";
        if (strict_) throw PrivacyError(component, msg);
        log(LogLevel::Warn, msg);
    }
    bool strict() const { return strict_; }
    const std::vector<std::string> &warnings() const { return warnings_; }

private:
    const PrivacyConfig cfg_;
    const bool strict_;
    std::vector<std::string> warnings_;
};

// ---- Phase II ----

struct RetrievalTrace {
    std::vector<std::string> queries;  // "Q1:MG", "Q4:LEMS", ...
    std::vector<Edge> edges;
    double seconds = 0;
};

// scenario entities = diseases named in the text; all pair diseases when none are named
inline std::vector<const DiseaseSpec *> scenario_diseases(const ClinicalScenario &s, const DiseasePairConfig &cfg) {
    std::vector<const DiseaseSpec *> out;
    auto names = classify_disease_context(s.scenario_text, cfg);
    if (names.empty())
        for (auto &d : cfg.diseases) names.push_back(d.short_name);
    for (auto &n : names)
        if (auto *d = cfg.disease(n)) out.push_back(d);
    return out;
}

inline RetrievalTrace retrieve_evidence(const Graph &g, const DiseasePairConfig &cfg, const ClinicalScenario &s) {
    RetrievalTrace tr;
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Edge> all;
    auto add = [&](const std::string &q, std::vector<Edge> v) {
        tr.queries.push_back(q);
        all.insert(all.end(), v.begin(), v.end());
    };
    for (auto *d : scenario_diseases(s, cfg)) {
        const auto &n = d->short_name;
        if (s.output_type == "differential") {
            add("Q1:" + n, query_comparative(g, n, cfg));
            std::optional<std::string> cui;
            if (!d->cuis.empty()) cui = d->cuis.front();
            add("Q4:" + n, query_neighbourhood(g, d->full_name, cui, n));
        } else if (s.output_type == "temporal" || s.output_type == "temporal_comparative") {
            add("Q2:" + n, query_temporal(g, n, cfg));
        } else if (s.output_type == "treatment") {
            add("Q3:" + n, query_treatment(g, n, cfg));
        } else {
            throw Error("no retrieval route for output_type " + s.output_type);
        }
    }
    tr.edges = dedup_by_id(std::move(all));
    tr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return tr;
}

struct Phase2Result {
    ClinicalOutput output;
    RetrievalTrace retrieval;
    Prompt prompt;
    std::optional<CitationAudit> audit;
};

struct Phase2Options {
    const RagIndex *rag = nullptr;  // required for the guideline_rag arm
    PubMedClient *audit_client = nullptr;
    GenParams params;
    // evidence rewrite hook, used by the counterfactual harness
    std::function<std::vector<Edge>(std::vector<Edge>)> evidence_hook;
};

inline Phase2Result run_phase2(const Graph &g, const DiseasePairConfig &cfg, const ClinicalScenario &s, Arm arm,
                               ModelProvider &provider, const PrivacyGate &gate, const Phase2Options &opt = {}) {
    gate.check("synthesis", provider.endpoint_host());
    Phase2Result r;
    std::vector<Chunk> chunks;
    if (arm == Arm::heg_tkg) {
        r.retrieval = retrieve_evidence(g, cfg, s);
        if (opt.evidence_hook) r.retrieval.edges = opt.evidence_hook(std::move(r.retrieval.edges));
    } else if (arm == Arm::guideline_rag) {
        if (!opt.rag) throw Error("guideline_rag arm needs a chunk index");
        chunks = opt.rag->retrieve(s.scenario_text);
    }
    r.prompt = build_prompt(arm, s, r.retrieval.edges, chunks);
    std::vector<std::string> chunk_ids;
    for (auto &c : chunks) chunk_ids.push_back(c.id);
    r.output = synthesize(r.prompt, provider, opt.params, s.id, arm,
                          arm == Arm::heg_tkg ? manifest_of(r.retrieval.edges) : std::vector<ManifestEntry>{}, chunk_ids);
    if (opt.audit_client) r.audit = audit_text(s.id + "/" + arm_name(arm), r.output.text, cfg, *opt.audit_client);
    return r;
}

// ---- counterfactual harness ----

enum class CfOutcome { Resisted, Partial, Faithful };
inline const char *cf_name(CfOutcome o) {
    return o == CfOutcome::Resisted ? "Resisted" : o == CfOutcome::Partial ? "Partial" : "Faithful";
}

struct CounterfactualCase {
    std::string id;
    std::string disease_pair;
    std::string scenario_id;
    std::string injected_statement;
    Edge injected_edge;
    std::vector<std::string> resist_keywords;    // phrases contradicting the injection
    std::vector<std::string> faithful_keywords;  // phrases repeating it

    const std::string &marker_pmid() const { return injected_edge.pmid_list.front(); }
};

inline CounterfactualCase cf_from_json(const json &j) {
    CounterfactualCase c;
    c.id = j.at("id").get<std::string>();
    c.disease_pair = j.at("disease_pair").get<std::string>();
    c.scenario_id = j.at("scenario_id").get<std::string>();
    c.injected_statement = j.at("injected_statement").get<std::string>();
    c.injected_edge = edge_from_json(j.at("injected_edge"));
    c.injected_edge.edge_id = edge_key(c.injected_edge.subject, c.injected_edge.predicate, c.injected_edge.object);
    if (c.injected_edge.evidence_sample.empty()) c.injected_edge.evidence_sample = c.injected_statement;
    if (c.injected_edge.pmid_list.size() != 1)
        throw Error("counterfactual " + c.id + ": injected edge must carry exactly one marker PMID");
    c.resist_keywords = j.value("resist_keywords", std::vector<std::string>{});
    c.faithful_keywords = j.value("faithful_keywords", std::vector<std::string>{});
    return c;
}

inline std::vector<CounterfactualCase> load_counterfactuals(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j = json::parse(in);
    std::vector<CounterfactualCase> out;
    for (auto &x : j.at("cases")) out.push_back(cf_from_json(x));
    return out;
}

// injected edge goes first; marker must not collide with any corpus PMID
inline std::vector<Edge> inject_counterfactual(std::vector<Edge> evidence, const CounterfactualCase &cf,
                                               const std::set<std::string> &corpus_pmids) {
    if (corpus_pmids.count(cf.marker_pmid()))
        throw Error("counterfactual " + cf.id + ": marker PMID " + cf.marker_pmid() + " collides with the corpus");
    evidence.insert(evidence.begin(), cf.injected_edge);
    return evidence;
}

inline std::vector<Edge> remove_counterfactual(std::vector<Edge> evidence, const CounterfactualCase &cf) {
    evidence.erase(std::remove_if(evidence.begin(), evidence.end(),
                                  [&](const Edge &e) {
                                      return e.edge_id == cf.injected_edge.edge_id &&
                                             e.pmid_list == cf.injected_edge.pmid_list;
                                  }),
                   evidence.end());
    return evidence;
}

struct CfResult {
    std::string id;
    CfOutcome outcome = CfOutcome::Resisted;
    bool detectable = false;
};

inline CfResult classify_cf_outcome(const ClinicalOutput &o, const CounterfactualCase &cf) {
    CfResult r;
    r.id = cf.id;
    auto pm = o.manifest_pmids();
    auto inline_pmids = extract_pmids(o.text);
    r.detectable = pm.count(cf.marker_pmid()) ||
                   std::find(inline_pmids.begin(), inline_pmids.end(), cf.marker_pmid()) != inline_pmids.end();
    bool resists = false, repeats = false;
    for (auto &k : cf.resist_keywords) resists |= icontains(o.text, k);
    for (auto &k : cf.faithful_keywords) repeats |= icontains(o.text, k);
    r.outcome = resists && repeats ? CfOutcome::Partial : repeats ? CfOutcome::Faithful : CfOutcome::Resisted;
    return r;
}

// ---- reports ----

struct PairStats {
    std::string pair;
    GraphStats stats;
};

inline std::string render_kg_stats(const std::vector<PairStats> &rows) {
    std::string out = "| Statistic |";
    for (auto &r : rows) out += " " + r.pair + " |";
    out += " Total |\n|---|";
    for (size_t i = 0; i <= rows.size(); ++i) out += "---|";
    out += "\n";
    auto line = [&](const char *name, auto get) {
        size_t tot = 0;
        out += std::string("| ") + name + " |";
        for (auto &r : rows) {
            out += " " + std::to_string(get(r.stats)) + " |";
            tot += get(r.stats);
        }
        out += " " + std::to_string(tot) + " |\n";
    };
    line("Unique PMIDs in KG", [](const GraphStats &s) { return s.pmids; });
    line("Total nodes", [](const GraphStats &s) { return s.nodes; });
    line("Total edges", [](const GraphStats &s) { return s.edges; });
    line("Temporal anchors", [](const GraphStats &s) { return s.anchors; });
    line("GOLD quality edges", [](const GraphStats &s) { return s.gold; });
    return out;
}

inline std::string render_audit_summary(const std::vector<std::pair<std::string, CitationAudit>> &per_arm) {
    std::string out = "| Arm | Unique PMIDs | Relevant | Wrong Field | Not Found |\n|---|---|---|---|---|\n";
    for (auto &[arm, a] : per_arm) {
        auto cell = [&](size_t n) { return std::to_string(n) + " (" + fixed(a.pct(n), 1) + "%)"; };
        out += "| " + arm + " | " + std::to_string(a.total()) + " | " + cell(a.relevant) + " | " + cell(a.wrong_field) +
               " | " + cell(a.not_found) + " |\n";
    }
    return out;
}

inline std::string render_cf_table(const std::vector<CfResult> &rs) {
    size_t n = rs.size(), res = 0, part = 0, faith = 0, det = 0;
    for (auto &r : rs) {
        res += r.outcome == CfOutcome::Resisted;
        part += r.outcome == CfOutcome::Partial;
        faith += r.outcome == CfOutcome::Faithful;
        det += r.detectable;
    }
    auto row = [&](const char *label, size_t k) {
        return std::string("| ") + label + " | " + std::to_string(k) + "/" + std::to_string(n) + " | " +
               (n ? fixed(100.0 * k / n, 0) : std::string("0")) + "% |\n";
    };
    std::string out = "| Outcome | Count | Percentage |\n|---|---|---|\n";
    out += row("Parametric resistance (correct despite wrong evidence)", res);
    out += row("Partial incorporation (hedged with correct knowledge)", part);
    out += row("Faithful to wrong evidence", faith);
    out += row("Detectable via citation traceability", det);
    out += "\n| Case | Outcome | Detectable |\n|---|---|---|\n";
    for (auto &r : rs) out += "| " + r.id + " | " + cf_name(r.outcome) + " | " + (r.detectable ? "yes" : "no") + " |\n";
    return out;
}

}  // namespace provgraph
