#include <gtest/gtest.h>

#include <fixture_run.hpp>

using namespace provgraph;

namespace {

class CountingRemote : public ModelProvider {
public:
    std::string id() const override { return "remote"; }
    std::string endpoint_host() const override { return "api.example.com"; }
    ScreenReply screen(const Abstract &, const DiseasePairConfig &) override { return {}; }
    std::vector<RawTriplet> extract(const Abstract &, const DiseasePairConfig &) override { return {}; }
    std::string complete(const std::string &, const std::string &, const GenParams &) override {
        ++calls;
        return "";
    }
    int calls = 0;
};

ClinicalScenario scenario_of(const std::string &id) {
    for (auto &s : load_scenarios(fixture::dir() + "/scenarios.json"))
        if (s.id == id) return s;
    throw Error("no scenario " + id);
}

}  // namespace

TEST(Phase1, FixtureRunIsPinned) {
    auto cfg = fixture::config();
    auto r = fixture::phase1(cfg);
    auto &rep = r.report;
    EXPECT_EQ(rep.abstracts, 20u);
    EXPECT_EQ(rep.screened_in, 17u);
    EXPECT_EQ(rep.screened_out, 3u);
    EXPECT_EQ(rep.extraction.returned, 46u);
    EXPECT_EQ(rep.extraction.dropped_quote, 1u);
    EXPECT_EQ(rep.triplets_kept, 45u);
    EXPECT_EQ(rep.rule_counts, (std::map<std::string, size_t>{{"1", 1}, {"2", 1}}));
    EXPECT_EQ(rep.temporal_triplets, 13u);
    EXPECT_EQ(rep.anchors_resolved, 13u);
    EXPECT_EQ(rep.tier1_edges, 5u);
    EXPECT_EQ(rep.tier2_edges, 28u);
    EXPECT_EQ(rep.absorbed, 4u);
    EXPECT_EQ(rep.tier_histogram, (std::map<std::string, size_t>{{"GOLD", 5}, {"SILVER", 13}, {"BRONZE", 11}}));
    EXPECT_EQ(rep.edges, 29u);
    EXPECT_EQ(rep.nodes, 28u);
    EXPECT_EQ(r.graph.edges().size(), rep.edges);
    for (auto &e : r.graph.edges()) {
        EXPECT_FALSE(e.pmid_list.empty()) << e.edge_id;
        if (e.tier == Tier::GOLD) EXPECT_TRUE(e.is_protected);
    }
}

TEST(Phase1, Deterministic) {
    auto cfg = fixture::config();
    auto a = fixture::phase1(cfg);
    auto b = fixture::phase1(cfg);
    EXPECT_EQ(export_import_script(a.graph), export_import_script(b.graph));
    EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
}

TEST(Phase1, EmptyCorpusFailsAtScreening) {
    auto cfg = fixture::config();
    auto p = fixture::providers();
    try {
        run_phase1(cfg, {}, p.list());
        FAIL();
    } catch (const StageError &e) {
        EXPECT_EQ(e.stage, "screening");
    }
    EXPECT_THROW(run_phase1(cfg, load_corpus(fixture::dir() + "/abstracts.jsonl"), {}), StageError);
}

TEST(Phase2, Routing) {
    auto cfg = fixture::config();
    auto g = fixture::phase1(cfg).graph;
    auto ddx = retrieve_evidence(g, cfg, scenario_of("DMD_BMD_FX_DDX"));
    EXPECT_EQ(ddx.queries, (std::vector<std::string>{"Q1:DMD", "Q4:DMD", "Q1:BMD", "Q4:BMD"}));
    EXPECT_FALSE(ddx.edges.empty());
    EXPECT_LT(ddx.seconds, 1.0);
    auto temp = retrieve_evidence(g, cfg, scenario_of("DMD_BMD_FX_TEMP"));
    EXPECT_EQ(temp.queries, std::vector<std::string>{"Q2:DMD"});
    for (auto &e : temp.edges) EXPECT_TRUE(e.resolved_anchor());
    auto tx = retrieve_evidence(g, cfg, scenario_of("DMD_BMD_FX_TX"));
    EXPECT_EQ(tx.queries, std::vector<std::string>{"Q3:DMD"});
    for (auto &e : tx.edges) EXPECT_TRUE(is_treatment(e.predicate));
}

TEST(Phase2, PrivacyAbortsBeforeProviderCall) {
    auto cfg = fixture::config();
    Graph g;
    CountingRemote remote;
    PrivacyGate strict(PrivacyConfig{}, true);
    EXPECT_THROW(run_phase2(g, cfg, scenario_of("DMD_BMD_FX_TX"), Arm::vanilla, remote, strict), PrivacyError);
    EXPECT_EQ(remote.calls, 0);
    PrivacyGate lenient(PrivacyConfig{}, false);
    auto r = run_phase2(g, cfg, scenario_of("DMD_BMD_FX_TX"), Arm::vanilla, remote, lenient);
    EXPECT_EQ(remote.calls, 1);
    EXPECT_FALSE(r.output.phi_compliant);
}

TEST(Phase2, ArmsAndAudit) {
    auto cfg = fixture::config();
    auto g = fixture::phase1(cfg).graph;
    FixtureIndex idx(fixture::dir() + "/pubmed_index.json");
    auto runs = fixture::phase2(g, cfg, idx);
    ASSERT_EQ(runs.size(), 9u);
    std::set<std::string> heg_pmids;
    for (auto &r : runs) {
        ASSERT_TRUE(r.result.audit.has_value());
        auto &a = *r.result.audit;
        if (r.arm == Arm::heg_tkg) {
            EXPECT_GT(a.total(), 0u) << r.scenario.id;
            EXPECT_EQ(a.relevant, a.total()) << r.scenario.id;
            heg_pmids.insert(a.pmids.begin(), a.pmids.end());
            for (auto &p : a.pmids) EXPECT_TRUE(r.result.output.manifest_pmids().count(p));
        } else {
            EXPECT_EQ(a.total(), 0u);
            EXPECT_TRUE(r.result.output.evidence_manifest.empty());
        }
        if (r.arm == Arm::guideline_rag) EXPECT_FALSE(r.result.output.chunk_ids.empty());
    }
    EXPECT_EQ(heg_pmids.size(), 17u);
}

TEST(Counterfactual, InjectAndRemove) {
    auto cases = load_counterfactuals(fixture::dir() + "/counterfactuals.json");
    ASSERT_EQ(cases.size(), 3u);
    auto &cf = cases[0];
    auto only = inject_counterfactual({}, cf, {});
    ASSERT_EQ(only.size(), 1u);
    EXPECT_EQ(only[0].pmid_list, std::vector<std::string>{cf.marker_pmid()});

    auto cfg = fixture::config();
    auto g = fixture::phase1(cfg).graph;
    auto ev = retrieve_evidence(g, cfg, scenario_of(cf.scenario_id)).edges;
    auto injected = inject_counterfactual(ev, cf, g.all_pmids());
    EXPECT_NE(format_evidence_block(injected).find(cf.injected_edge.object.surface), std::string::npos);
    EXPECT_EQ(format_evidence_block(remove_counterfactual(injected, cf)), format_evidence_block(ev));
    EXPECT_THROW(inject_counterfactual(ev, cf, {cf.marker_pmid()}), Error);
}

TEST(Counterfactual, FixtureOutcomes) {
    auto cfg = fixture::config();
    auto g = fixture::phase1(cfg).graph;
    auto rs = fixture::counterfactuals(g, cfg);
    ASSERT_EQ(rs.size(), 3u);
    size_t det = 0, faithful = 0, resisted = 0;
    for (auto &r : rs) {
        det += r.detectable;
        faithful += r.outcome == CfOutcome::Faithful;
        resisted += r.outcome == CfOutcome::Resisted;
    }
    EXPECT_EQ(det, 3u);
    EXPECT_EQ(faithful, 2u);
    EXPECT_EQ(resisted, 1u);
    EXPECT_NE(render_cf_table(rs).find("| Detectable via citation traceability | 3/3 | 100% |"), std::string::npos);
}

TEST(Counterfactual, ClassifyByKeywords) {
    CounterfactualCase cf;
    cf.id = "CF";
    cf.injected_edge.pmid_list = {"99999901"};
    cf.resist_keywords = {"recommended"};
    cf.faithful_keywords = {"contraindicated"};
    ClinicalOutput o;
    o.text = "Steroids are recommended.";
    EXPECT_EQ(classify_cf_outcome(o, cf).outcome, CfOutcome::Resisted);
    EXPECT_FALSE(classify_cf_outcome(o, cf).detectable);
    o.text = "Steroids are contraindicated [PMID:99999901, GOLD].";
    EXPECT_EQ(classify_cf_outcome(o, cf).outcome, CfOutcome::Faithful);
    EXPECT_TRUE(classify_cf_outcome(o, cf).detectable);
    o.text = "Although contraindicated per one source, steroids are recommended.";
    EXPECT_EQ(classify_cf_outcome(o, cf).outcome, CfOutcome::Partial);
}

TEST(Reports, EmptyInputsGiveHeaders) {
    EXPECT_EQ(render_kg_stats({}),
              "| Statistic | Total |\n|---|---|\n| Unique PMIDs in KG | 0 |\n| Total nodes | 0 |\n| Total edges | 0 |\n"
              "| Temporal anchors | 0 |\n| GOLD quality edges | 0 |\n");
    EXPECT_EQ(render_audit_summary({}), "| Arm | Unique PMIDs | Relevant | Wrong Field | Not Found |\n|---|---|---|---|---|\n");
    EXPECT_EQ(render_cf_table({}).find("| Faithful to wrong evidence | 0/0 | 0% |") != std::string::npos, true);
}

TEST(Reports, StatsTotalsSumPairs) {
    GraphStats a, b;
    a.pmids = 3, a.nodes = 10, a.edges = 20, a.anchors = 4, a.gold = 1;
    b.pmids = 5, b.nodes = 1, b.edges = 2, b.anchors = 0, b.gold = 2;
    auto t = render_kg_stats({{"mg_lems", a}, {"dmd_bmd", b}});
    EXPECT_NE(t.find("| Total edges | 20 | 2 | 22 |"), std::string::npos);
    EXPECT_NE(t.find("| GOLD quality edges | 1 | 2 | 3 |"), std::string::npos);
}
