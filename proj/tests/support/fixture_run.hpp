#pragma once

// Hermetic end-to-end run over the bundled DMD/BMD fixture.

#include <memory>
#include <string>
#include <vector>

#include <provgraph/pipeline.hpp>

namespace fixture {

using namespace provgraph;

inline std::string dir() { return std::string(PROVGRAPH_DATA_DIR) + "/fixtures/dmd_bmd"; }

inline DiseasePairConfig config() { return load_config_file(std::string(PROVGRAPH_DATA_DIR) + "/pairs/dmd_bmd.yaml"); }

struct Providers {
    std::unique_ptr<FixtureProvider> a, b;
    std::vector<ModelProvider *> list() { return {a.get(), b.get()}; }
};

inline Providers providers() {
    Providers p;
    p.a = FixtureProvider::from_file("gemma3-27b", dir() + "/providers.jsonl");
    p.b = FixtureProvider::from_file("qwen3-14b", dir() + "/providers.jsonl");
    return p;
}

inline Phase1Result phase1(const DiseasePairConfig &cfg) {
    auto p = providers();
    auto chain = ResolverChain::standard(cfg);
    return run_phase1(cfg, load_corpus(dir() + "/abstracts.jsonl"), p.list(), load_tier1(dir() + "/tier1.jsonl", &chain));
}

struct ArmRun {
    ClinicalScenario scenario;
    Arm arm;
    Phase2Result result;
};

// every scenario through every arm with the echo synthesiser and the fixture index
inline std::vector<ArmRun> phase2(const Graph &g, const DiseasePairConfig &cfg, FixtureIndex &index) {
    EchoSynthesisProvider echo;
    PrivacyGate gate(PrivacyConfig{}, true);
    RagIndex rag(documents_from_corpus(load_corpus(dir() + "/abstracts.jsonl")));
    Phase2Options opt;
    opt.rag = &rag;
    opt.audit_client = &index;
    std::vector<ArmRun> out;
    for (auto &s : load_scenarios(dir() + "/scenarios.json"))
        for (auto a : kArms) out.push_back({s, a, run_phase2(g, cfg, s, a, echo, gate, opt)});
    return out;
}

inline std::vector<CfResult> counterfactuals(const Graph &g, const DiseasePairConfig &cfg) {
    EchoSynthesisProvider echo;
    PrivacyGate gate(PrivacyConfig{}, true);
    auto pmids = g.all_pmids();
    for (auto &a : load_corpus(dir() + "/abstracts.jsonl")) pmids.insert(a.pmid);
    std::map<std::string, ClinicalScenario> scen;
    for (auto &s : load_scenarios(dir() + "/scenarios.json")) scen[s.id] = s;
    std::vector<CfResult> out;
    for (auto &c : load_counterfactuals(dir() + "/counterfactuals.json")) {
        Phase2Options opt;
        opt.evidence_hook = [&](std::vector<Edge> ev) { return inject_counterfactual(std::move(ev), c, pmids); };
        auto r = run_phase2(g, cfg, scen.at(c.scenario_id), Arm::heg_tkg, echo, gate, opt);
        out.push_back(classify_cf_outcome(r.output, c));
    }
    return out;
}

}  // namespace fixture
