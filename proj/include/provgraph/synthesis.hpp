#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "consensus.hpp"
#include "extraction.hpp"
#include "log.hpp"
#include "util.hpp"

namespace provgraph {

inline const std::vector<std::string> kOutputTypes = {"differential", "temporal_comparative", "temporal", "treatment"};

struct ClinicalScenario {
    std::string id;
    std::string disease_pair;
    std::string output_type;
    std::string scenario_text;
    std::vector<std::string> expected_key_features;
    std::string source_reference;
};

inline ClinicalScenario scenario_from_json(const json &j) {
    ClinicalScenario s;
    s.id = j.at("id").get<std::string>();
    s.disease_pair = j.at("disease_pair").get<std::string>();
    s.output_type = j.at("output_type").get<std::string>();
    s.scenario_text = j.at("scenario_text").get<std::string>();
    s.expected_key_features = j.at("expected_key_features").get<std::vector<std::string>>();
    s.source_reference = j.value("source_reference", "");
    if (std::find(kOutputTypes.begin(), kOutputTypes.end(), s.output_type) == kOutputTypes.end())
        throw Error("scenario " + s.id + ": unknown output_type '" + s.output_type + "'");
    if (s.expected_key_features.empty()) throw Error("scenario " + s.id + ": expected_key_features is empty");
    return s;
}

inline json to_json(const ClinicalScenario &s) {
    return json{{"id", s.id},
                {"disease_pair", s.disease_pair},
                {"output_type", s.output_type},
                {"scenario_text", s.scenario_text},
                {"expected_key_features", s.expected_key_features},
                {"source_reference", s.source_reference}};
}

// accepts a JSON array or {"scenarios": [...]}
inline std::vector<ClinicalScenario> load_scenarios(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j = json::parse(in);
    if (j.is_object()) j = j.at("scenarios");
    std::vector<ClinicalScenario> out;
    for (auto &x : j) out.push_back(scenario_from_json(x));
    return out;
}

enum class Arm { vanilla, guideline_rag, heg_tkg };
inline const std::vector<Arm> kArms = {Arm::vanilla, Arm::guideline_rag, Arm::heg_tkg};

inline const char *arm_name(Arm a) {
    switch (a) {
    case Arm::vanilla: return "vanilla";
    case Arm::guideline_rag: return "guideline_rag";
    case Arm::heg_tkg: return "heg_tkg";
    }
    return "?";
}

inline Arm parse_arm(const std::string &s) {
    for (auto a : kArms)
        if (s == arm_name(a)) return a;
    throw Error("unknown arm '" + s + "'");
}

struct ManifestEntry {
    std::string edge_id;
    std::vector<std::string> pmid_list;
    Tier tier = Tier::BRONZE;
};

struct ClinicalOutput {
    std::string scenario_id;
    Arm arm = Arm::vanilla;
    std::string text;
    std::vector<ManifestEntry> evidence_manifest;
    std::vector<std::string> chunk_ids;
    std::string provider;
    bool phi_compliant = false;
    GenParams params;

    std::set<std::string> manifest_pmids() const {
        std::set<std::string> s;
        for (auto &m : evidence_manifest) s.insert(m.pmid_list.begin(), m.pmid_list.end());
        return s;
    }
};

inline json manifest_json(const ClinicalOutput &o) {
    json edges = json::array();
    for (auto &m : o.evidence_manifest)
        edges.push_back(json{{"edge_id", m.edge_id}, {"pmid_list", m.pmid_list}, {"tier", tier_name(m.tier)}});
    return json{{"scenario_id", o.scenario_id},
                {"arm", arm_name(o.arm)},
                {"provider", o.provider},
                {"phi_compliant", o.phi_compliant},
                {"temperature", o.params.temperature},
                {"max_tokens", o.params.max_tokens},
                {"edges", edges},
                {"chunk_ids", o.chunk_ids}};
}

inline std::vector<ManifestEntry> manifest_of(const std::vector<Edge> &edges) {
    std::vector<ManifestEntry> m;
    for (auto &e : edges) m.push_back({e.edge_id, e.pmid_list, e.tier});
    return m;
}

// [Subject] ->PREDICATE-> [Object]
// PMID: ... | Tier: ... | Temporal: ...
// Evidence: "..."
inline std::string format_evidence_block(const std::vector<Edge> &edges) {
    std::string out;
    for (size_t i = 0; i < edges.size(); ++i) {
        auto &e = edges[i];
        if (i) out += "\n";
        out += "[" + e.subject.surface + "] ->" + e.predicate + "-> [" + e.object.surface + "]\n";
        out += "PMID: " + join(e.pmid_list, ", ") + " | Tier: " + tier_name(e.tier);
        if (e.is_temporal && e.resolved_anchor()) out += " | Temporal: " + e.temporal_display();
        out += "\n";
        out += "Evidence: \"" + e.evidence_sample + "\"\n";
    }
    return out;
}

// ---- guideline-RAG baseline ----

struct Document {
    std::string id;
    std::string text;
};

struct Chunk {
    std::string id;
    std::string doc_id;
    size_t offset = 0;
    std::string text;
};

inline constexpr size_t kChunkSize = 500;
inline constexpr size_t kChunkOverlap = 80;
inline constexpr size_t kRagTopK = 10;

inline std::vector<Chunk> chunk_document(const Document &d, size_t size = kChunkSize, size_t overlap = kChunkOverlap) {
    if (overlap >= size) throw Error("chunk overlap must be smaller than chunk size");
    std::vector<Chunk> out;
    const size_t stride = size - overlap;
    for (size_t off = 0, n = 0; off < d.text.size(); off += stride, ++n) {
        char idx[16];
        std::snprintf(idx, sizeof idx, "%05zu", n);
        out.push_back({d.id + "#" + idx, d.id, off, d.text.substr(off, size)});
        if (off + size >= d.text.size()) break;
    }
    return out;
}

// feature hashing of lowercased character 3-grams, L2-normalised
class HashEmbedder {
public:
    explicit HashEmbedder(size_t dim = 1024) : dim_(dim) {}
    std::vector<float> embed(const std::string &text) const {
        std::vector<float> v(dim_, 0.f);
        auto s = lower(text);
        for (size_t i = 0; i + 3 <= s.size(); ++i) v[fnv1a(s.data() + i, 3) % dim_] += 1.f;
        double n = 0;
        for (float x : v) n += double(x) * x;
        if (n > 0)
            for (auto &x : v) x = float(x / std::sqrt(n));
        return v;
    }

private:
    static uint64_t fnv1a(const char *p, size_t n) {
        uint64_t h = 1469598103934665603ull;
        for (size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(p[i]);
            h *= 1099511628211ull;
        }
        return h;
    }
    size_t dim_;
};

inline double cosine(const std::vector<float> &a, const std::vector<float> &b) {
    double d = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        d += double(a[i]) * b[i];
        na += double(a[i]) * a[i];
        nb += double(b[i]) * b[i];
    }
    return na > 0 && nb > 0 ? d / std::sqrt(na * nb) : 0.0;
}

class RagIndex {
public:
    explicit RagIndex(const std::vector<Document> &docs, HashEmbedder emb = HashEmbedder()) : emb_(emb) {
        if (docs.empty()) throw Error("rag index: empty corpus");
        for (auto &d : docs)
            for (auto &c : chunk_document(d)) chunks_.push_back(std::move(c));
        for (auto &c : chunks_) vecs_.push_back(emb_.embed(c.text));
    }

    size_t size() const { return chunks_.size(); }
    const std::vector<Chunk> &chunks() const { return chunks_; }

    std::vector<Chunk> retrieve(const std::string &query, size_t k = kRagTopK) const {
        auto q = emb_.embed(query);
        std::vector<std::pair<double, size_t>> scored;
        for (size_t i = 0; i < chunks_.size(); ++i) scored.push_back({cosine(q, vecs_[i]), i});
        std::sort(scored.begin(), scored.end(), [&](auto &a, auto &b) {
            if (a.first != b.first) return a.first > b.first;
            return chunks_[a.second].id < chunks_[b.second].id;
        });
        std::vector<Chunk> out;
        for (size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(chunks_[scored[i].second]);
        return out;
    }

private:
    HashEmbedder emb_;
    std::vector<Chunk> chunks_;
    std::vector<std::vector<float>> vecs_;
};

inline std::vector<Chunk> retrieve_rag_chunks(const std::vector<Document> &corpus, const std::string &query,
                                              size_t k = kRagTopK) {
    return RagIndex(corpus).retrieve(query, k);
}

inline std::vector<Document> documents_from_corpus(const std::vector<Abstract> &abs) {
    std::vector<Document> out;
    for (auto &a : abs) out.push_back({a.pmid, a.title.empty() ? a.text : a.title + " " + a.text});
    return out;
}

// ---- prompts ----

namespace prompts {

inline const std::string kHegDifferential =
    R"P(You are a senior clinical neurologist writing an evidence-grounded differential
diagnosis for a colleague. You have access to a curated knowledge graph with
hierarchical evidence tiers.

Your response should be as DETAILED and COMPREHENSIVE as a clinical consultation
note -- not a brief summary. For each differentiating feature, provide the clinical
reasoning, not just the fact. Think like a neurologist explaining to a fellow.

EVIDENCE CITATION RULES:
- The knowledge graph evidence uses PMID-based citations like [PMID:36637960, GOLD].
  Preserve these exact citation tags when referencing evidence.
- GOLD = Tier 1 curated sources (GeneReviews, OMIM, clinical guidelines) -- highest reliability.
- SILVER = Cross-validated across multiple extraction models -- good confidence.
- BRONZE = Single study or single model -- use with appropriate caveats.
- You MAY -- and SHOULD -- supplement with your clinical expertise to explain WHY
  a feature differentiates, to add pathophysiological context, and to cover
  features that are clinically important but absent from the KG evidence. Clearly
  distinguish: "[PMID:..., GOLD]" for KG-backed claims vs "Clinically, ..." for
  your expert knowledge.
- When evidence conflicts are flagged, present BOTH sides and discuss the
  likely explanation.
- If the KG evidence is sparse for a feature category, state this explicitly and
  supplement with your clinical knowledge, clearly marked as such.

STRUCTURE your response as:
1. A structured comparison table covering: Clinical Features, Antibodies/Biomarkers,
   Autonomic Features, Reflexes/EMG, Treatment Approach, Temporal Course, Associated Conditions
2. For each feature, explain the pathophysiological basis for the difference
3. A clinical synthesis paragraph: what features in this specific patient point toward
   which diagnosis, what tests to order, and what red flags to watch for
4. An evidence quality note: summarize what is backed by guidelines vs single studies)P";

inline const std::string kHegTemporal =
    R"P(You are a senior clinical neurologist writing a disease progression comparison
for a colleague. You have access to temporal evidence from a curated knowledge
graph with specific time anchors derived from clinical guidelines and literature.

Your response should be DETAILED -- a clinical teaching case, not a bullet list.
For each time window, explain what is happening pathophysiologically, what the
clinician should monitor, and what interventions are indicated.

EVIDENCE CITATION RULES:
- Preserve the PMID-based citation tags from the evidence (e.g., [PMID:36637960, GOLD]).
- GOLD = curated guidelines, SILVER = cross-validated, BRONZE = single study.
- You MAY -- and SHOULD -- add clinical interpretation around the temporal data,
  explain what clinicians should do at each time window, and fill gaps where the
  KG evidence is sparse. Clearly mark KG-backed claims (with citations) vs your
  expert supplementation (with "Clinically, ...").
- When comparing two diseases, explicitly highlight where their temporal trajectories
  DIVERGE -- these are the clinically actionable differences for differential diagnosis.
- If a time window has no KG evidence, say so and provide expert guidance.

STRUCTURE your response as:
1. A quick-reference milestone comparison (side-by-side table or timeline)
2. Detailed time-window-by-time-window analysis with clinical implications
3. For each divergence point: explain why the difference matters clinically
4. A synthesis: key temporal red flags that distinguish these conditions
5. Note evidence gaps -- which time windows lack high-quality data)P";

inline const std::string kHegTreatment =
    R"P(You are a senior clinical neurologist writing treatment recommendations for a
colleague. You have access to treatment evidence from a curated knowledge graph
with hierarchical quality tiers.

Your response should be as DETAILED as a treatment protocol -- dosing, monitoring,
expected timelines, and escalation logic. Think like a neurologist writing a
management plan.

EVIDENCE CITATION RULES:
- Preserve PMID-based citation tags from the evidence (e.g., [PMID:36637960, GOLD]).
- GOLD = guideline-level evidence, SILVER = cross-validated, BRONZE = single study.
- Present treatments ordered by evidence quality (GOLD-supported first).
- You MAY -- and SHOULD -- explain mechanisms of action, dosing protocols, monitoring
  parameters, and clinical rationale using your expertise. Treatments mentioned in the
  KG evidence must cite their source. You may also mention clinically important
  treatments NOT in the KG evidence if they are well-established, but clearly
  mark them as "Clinically established (not in current KG)" so the provenance
  distinction is transparent.

STRUCTURE your response as:
1. First-line treatment with evidence tier, dosing, and rationale
2. Second-line options with escalation criteria and timing
3. For each treatment: mechanism, expected response timeline, monitoring requirements
4. Emerging therapies / newer agents with evidence tier
5. Treatments with conflicting evidence: present both sides with tiers
6. Clinical synthesis: recommended treatment algorithm for this specific patient
7. Evidence quality summary: what is guideline-backed vs. emerging vs. expert opinion)P";

inline const std::string kVanillaDifferential =
    R"P(You are a clinical neurology expert. Provide a detailed, evidence-based
differential diagnosis for the clinical scenario presented. Cover clinical
features, antibodies/biomarkers, treatment differences, temporal course,
and associated conditions.)P";

inline const std::string kVanillaTemporal =
    R"P(You are a clinical neurology expert. Provide a detailed disease progression
timeline for the clinical scenario presented. Include onset patterns, key
milestones, treatment timing, and long-term prognosis.)P";

inline const std::string kVanillaTreatment =
    R"P(You are a clinical neurology expert. Provide comprehensive, evidence-based
treatment recommendations for the clinical scenario presented. Cover first-line
and second-line options, mechanisms, and expected outcomes.)P";

inline const std::string kGuidelineRag =
    R"P(You are a clinical neurology expert. You have been provided with reference
text from authoritative clinical sources (GeneReviews, OMIM, clinical
guidelines). Use this reference material to inform your answer.

Your response should be DETAILED and clinically comprehensive. Where possible,
indicate which source a claim comes from (e.g., "per GeneReviews..." or
"according to OMIM..."). You may supplement with your clinical knowledge but
prioritise the provided reference text.

Be as thorough as you would be when writing a clinical consultation report.)P";

}  // namespace prompts

inline const std::string &system_prompt(Arm arm, const std::string &output_type) {
    enum { D, T, R } kind;
    if (output_type == "differential")
        kind = D;
    else if (output_type == "temporal" || output_type == "temporal_comparative")
        kind = T;
    else if (output_type == "treatment")
        kind = R;
    else
        throw Error(std::string("no prompt template for (") + arm_name(arm) + ", " + output_type + ")");
    switch (arm) {
    case Arm::heg_tkg: return kind == D ? prompts::kHegDifferential : kind == T ? prompts::kHegTemporal : prompts::kHegTreatment;
    case Arm::vanilla:
        return kind == D ? prompts::kVanillaDifferential : kind == T ? prompts::kVanillaTemporal : prompts::kVanillaTreatment;
    case Arm::guideline_rag: return prompts::kGuidelineRag;
    }
    throw Error("unknown arm");
}

struct Prompt {
    std::string system;
    std::string user;
};

inline std::string evidence_segment(Arm arm, const std::vector<Edge> &edges, const std::vector<Chunk> &chunks) {
    switch (arm) {
    case Arm::vanilla: return "";
    case Arm::heg_tkg: return "\n## Knowledge Graph Evidence\n" + format_evidence_block(edges);
    case Arm::guideline_rag: {
        std::string s = "\n## Reference Text\n";
        for (auto &c : chunks) s += "[" + c.id + "]\n" + c.text + "\n\n";
        return s;
    }
    }
    return "";
}

// the only arm-dependent part of the user message is the evidence segment
inline std::string user_message(const ClinicalScenario &s, const std::string &segment) {
    return "## Clinical Scenario\n" + s.scenario_text + "\n" + segment + "\n## Output Type\n" + s.output_type + "\n";
}

inline Prompt build_prompt(Arm arm, const ClinicalScenario &s, const std::vector<Edge> &edges = {},
                           const std::vector<Chunk> &chunks = {}) {
    return {system_prompt(arm, s.output_type), user_message(s, evidence_segment(arm, edges, chunks))};
}

// ---- privacy gate ----

struct PrivacyConfig {
    std::set<std::string> local_hosts = {"localhost", "127.0.0.1", "::1", "0.0.0.0"};
    std::map<std::string, std::string> endpoints;  // component -> host ("" = in-process)
};

inline bool is_local_host(const PrivacyConfig &cfg, const std::string &host) {
    return host.empty() || cfg.local_hosts.count(lower(host)) > 0;
}

// strict: throws on the first component routed off the allowlist; otherwise warns
inline std::vector<std::string> validate_privacy_config(const PrivacyConfig &cfg, bool strict) {
    std::vector<std::string> warnings;
    for (auto &[component, host] : cfg.endpoints) {
        if (is_local_host(cfg, host)) continue;
        auto msg = component + " endpoint " + host + " is not a local host; patient data would leave the machine";
        if (strict) throw PrivacyError(component, msg);
        log(LogLevel::Warn, msg);
        warnings.push_back(msg);
    }
    return warnings;
}

inline ClinicalOutput synthesize(const Prompt &prompt, ModelProvider &provider, const GenParams &params,
                                 const std::string &scenario_id, Arm arm, std::vector<ManifestEntry> manifest = {},
                                 std::vector<std::string> chunk_ids = {}) {
    ClinicalOutput o;
    o.scenario_id = scenario_id;
    o.arm = arm;
    o.text = provider.complete(prompt.system, prompt.user, params);
    o.evidence_manifest = std::move(manifest);
    o.chunk_ids = std::move(chunk_ids);
    o.provider = provider.id();
    o.phi_compliant = is_local_host(PrivacyConfig{}, provider.endpoint_host());
    o.params = params;
    return o;
}

// In-process synthesis stand-in: restates every evidence edge as a cited
// sentence, otherwise answers from the scenario alone without identifiers.
class EchoSynthesisProvider : public ModelProvider {
public:
    std::string id() const override { return "echo-synth"; }
    ScreenReply screen(const Abstract &, const DiseasePairConfig &) override { return {false, 0}; }
    std::vector<RawTriplet> extract(const Abstract &, const DiseasePairConfig &) override { return {}; }

    std::string complete(const std::string &, const std::string &user, const GenParams &) override {
        std::string out = "## Clinical Assessment\n";
        auto lines = split_lines(user);
        out += "The presentation described here was reviewed in full and the findings are summarised below.\n\n";
        bool any = false;
        for (size_t i = 0; i + 1 < lines.size(); ++i) {
            auto &l = lines[i];
            auto arrow = l.find("] ->");
            if (l.empty() || l[0] != '[' || arrow == std::string::npos) continue;
            auto close = l.find("-> [", arrow + 4);
            if (close == std::string::npos) continue;
            auto subj = l.substr(1, arrow - 1);
            auto pred = lower(l.substr(arrow + 4, close - arrow - 4));
            std::replace(pred.begin(), pred.end(), '_', ' ');
            auto obj = l.substr(close + 4, l.size() - close - 5);
            auto meta = lines[i + 1];
            auto pm = meta.find("PMID: "), bar = meta.find(" | Tier: ");
            if (pm == std::string::npos || bar == std::string::npos) continue;
            auto pmids = meta.substr(pm + 6, bar - pm - 6);
            auto rest = meta.substr(bar + 9);
            auto tier = rest.substr(0, rest.find(" |"));
            std::string tags;
            for (auto &p : split(pmids, ','))
                tags += " [PMID:" + trim(p) + ", " + tier + "]";
            std::string when;
            if (auto t = rest.find("Temporal: "); t != std::string::npos) when = " at " + rest.substr(t + 10);
            out += "- " + subj + " " + pred + " " + obj + when + tags + ".\n";
            any = true;
        }
        if (!any) out += "Clinically, the working diagnosis rests on the history and examination findings described.\n";
        return out;
    }

private:
    static std::vector<std::string> split_lines(const std::string &s) {
        std::vector<std::string> out;
        size_t b = 0;
        while (b <= s.size()) {
            auto e = s.find('\n', b);
            if (e == std::string::npos) e = s.size();
            out.push_back(s.substr(b, e - b));
            b = e + 1;
        }
        return out;
    }
    static std::vector<std::string> split(const std::string &s, char c) {
        std::vector<std::string> out;
        size_t b = 0;
        for (size_t e; (e = s.find(c, b)) != std::string::npos; b = e + 1) out.push_back(s.substr(b, e - b));
        out.push_back(s.substr(b));
        return out;
    }
};

}  // namespace provgraph
