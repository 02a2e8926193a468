#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "citeverify.hpp"
#include "consensus.hpp"
#include "evalmetrics.hpp"
#include "extraction.hpp"
#include "log.hpp"
#include "statkit.hpp"
#include "synthesis.hpp"

namespace provgraph {

enum class Round { v1, v2 };
inline const char *round_name(Round r) { return r == Round::v1 ? "v1" : "v2"; }
inline Round parse_round(const std::string &s) {
    if (s == "v1") return Round::v1;
    if (s == "v2") return Round::v2;
    throw Error("unknown judge round '" + s + "'");
}

inline const std::array<const char *, 5> kDimensionKeys = {"D1_verifiability", "D2_actionability",
                                                           "D3_temporal_precision", "D4_nonexpert_safety",
                                                           "D5_clinical_completeness"};
inline const std::array<const char *, 5> kDimensionNames = {"D1 Verifiability", "D2 Actionability",
                                                            "D3 Temporal Precision", "D4 Non-Expert Safety",
                                                            "D5 Clinical Completeness"};

struct LikertScores {
    std::array<int, 5> d{};
    std::string brief_justification;
    std::string judge;
    std::string case_id;
    Round round = Round::v1;
};

// ---- blinding ----

struct JudgeCase {
    std::string scenario_id;
    Arm arm = Arm::vanilla;
    std::string scenario_text;
    std::string output_text;
};

struct BlindCase {
    std::string blind_id;
    std::string scenario_text;
    std::string output_text;
};

using SealedKey = std::map<std::string, std::pair<std::string, Arm>>;

inline std::pair<std::vector<BlindCase>, SealedKey> blind_and_shuffle(const std::vector<JudgeCase> &cases,
                                                                      uint64_t seed = 42) {
    std::set<std::pair<std::string, Arm>> seen;
    for (auto &c : cases)
        if (!seen.insert({c.scenario_id, c.arm}).second)
            throw Error("blind_and_shuffle: duplicate case " + c.scenario_id + "/" + arm_name(c.arm));
    std::vector<size_t> order(cases.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    stats::Rng rng(seed);
    rng.shuffle(order);
    std::vector<BlindCase> out;
    SealedKey key;
    std::set<std::string> ids;
    for (auto i : order) {
        std::string id;
        do {
            char buf[24];
            std::snprintf(buf, sizeof buf, "case-%08llx", static_cast<unsigned long long>(rng.next() & 0xffffffffull));
            id = buf;
        } while (!ids.insert(id).second);
        out.push_back({id, cases[i].scenario_text, cases[i].output_text});
        key[id] = {cases[i].scenario_id, cases[i].arm};
    }
    return {out, key};
}

// ---- judge prompts ----

namespace judge_text {

inline const std::array<const char *, 5> kRubric = {
    "Score 1-5 on whether clinical claims can be traced to specific published evidence. Does the output cite "
    "specific PMIDs, studies, or guidelines? Can a clinician verify each claim within 1 minute? Score 5 if most "
    "claims have verifiable citations; 1 if no citations.",
    "Score 1-5 on whether the output provides actionable clinical guidance. Does it specify concrete next steps, "
    "dosing, monitoring, or referral criteria? Score 5 if immediately actionable; 1 if only general information.",
    "Score 1-5 on whether the output provides specific time points for disease milestones, treatment response "
    "windows, and monitoring intervals. Score 5 if precise temporal anchoring; 1 if only vague temporal language.",
    "Score 1-5 on whether the output is safe for a non-specialist (e.g., GP) to act on. Are red flags clearly "
    "flagged? Are dangerous diagnostic pitfalls highlighted? Score 5 if safe for non-expert use; 1 if serious "
    "safety risks without specialist oversight.",
    "Score 1-5 on whether the output covers ALL clinically important features for this scenario: key "
    "differentiating features, relevant investigations, treatment options, prognosis, and red flags."};

inline const std::string kPreamble =
    "You are an expert clinical evaluator (board-certified neurologist with 15+ years\n"
    "of experience in neuromuscular diseases). You are evaluating an AI-generated\n"
    "clinical output for a rare neuromuscular disease scenario.\n";

inline const std::string kD1Instruction =
    "IMPORTANT: For D1 (Verifiability), use the Citation Audit Report above\n"
    "as ground truth. If the audit shows 0 PMIDs or mostly wrong-field citations,\n"
    "D1 should be LOW (1-2). If the audit shows most PMIDs are real and relevant,\n"
    "D1 should be HIGH (4-5).\n";

inline const std::string kResponseFormat =
    "## Response Format\n"
    "Respond ONLY with a JSON object (no markdown, no explanation):\n"
    "{\n"
    "  \"D1_verifiability\": <1-5>,\n"
    "  \"D2_actionability\": <1-5>,\n"
    "  \"D3_temporal_precision\": <1-5>,\n"
    "  \"D4_nonexpert_safety\": <1-5>,\n"
    "  \"D5_clinical_completeness\": <1-5>,\n"
    "  \"brief_justification\": \"<2-3 sentences explaining your overall assessment>\"\n"
    "}\n";

inline const std::string kReprompt =
    "\n\nYour previous reply could not be parsed. Respond ONLY with the JSON object described above.\n";

}  // namespace judge_text

// v2 = v1 + audit report after the output + D1 instruction before the dimensions
inline std::string judge_prompt(Round round, const std::string &scenario_text, const std::string &output_text,
                                const std::string &audit_report = "") {
    using namespace judge_text;
    std::string p = kPreamble;
    p += "\n## Clinical Scenario\n" + scenario_text + "\n";
    p += "\n## AI-Generated Output\n" + output_text + "\n";
    if (round == Round::v2) p += "\n" + audit_report;
    p += "\n## Evaluation Task\n";
    if (round == Round::v2) p += kD1Instruction;
    p += "Rate this output on EACH of the following 5 dimensions using a 1-5 Likert scale:\n";
    const char *labels[] = {"D1 (Verifiability)", "D2 (Actionability)", "D3 (Temporal Precision)",
                            "D4 (Non-Expert Safety)", "D5 (Clinical Completeness)"};
    for (size_t i = 0; i < 5; ++i) p += std::string("  ") + labels[i] + ": " + kRubric[i] + "\n";
    p += "\n" + kResponseFormat;
    return p;
}

inline json extract_json_object(const std::string &reply) {
    auto b = reply.find('{'), e = reply.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) throw ParseError("no JSON object in reply", reply);
    try {
        return json::parse(reply.substr(b, e - b + 1));
    } catch (const json::exception &ex) {
        throw ParseError(std::string("malformed JSON in reply: ") + ex.what(), reply);
    }
}

inline LikertScores parse_likert(const std::string &reply) {
    auto j = extract_json_object(reply);
    LikertScores s;
    for (size_t i = 0; i < 5; ++i) {
        if (!j.contains(kDimensionKeys[i])) throw ParseError(std::string("missing ") + kDimensionKeys[i], reply);
        auto &v = j[kDimensionKeys[i]];
        if (!v.is_number()) throw ParseError(std::string("non-numeric ") + kDimensionKeys[i], reply);
        double x = v.get<double>();
        if (x != std::floor(x) || x < 1 || x > 5)
            throw ParseError(std::string(kDimensionKeys[i]) + " out of range", reply);
        s.d[i] = static_cast<int>(x);
    }
    s.brief_justification = j.value("brief_justification", "");
    return s;
}

// nullopt = unscored after one re-prompt
inline std::optional<LikertScores> judge_case(const BlindCase &c, Round round, const CitationAudit *audit,
                                              ModelProvider &judge, const GenParams &params = {}) {
    if (round == Round::v2 && !audit) throw Error("judge_case: v2 requires a citation audit");
    auto prompt = judge_prompt(round, c.scenario_text, c.output_text, audit ? render_audit_report(*audit) : "");
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto reply = judge.complete("", attempt ? prompt + judge_text::kReprompt : prompt, params);
        try {
            auto s = parse_likert(reply);
            s.judge = judge.id();
            s.case_id = c.blind_id;
            s.round = round;
            return s;
        } catch (const ParseError &e) {
            log(LogLevel::Warn, "judge " + judge.id() + " on " + c.blind_id + ": " + e.what());
        }
    }
    return std::nullopt;
}

// Deterministic in-process judge. Follows the D1 instruction when an audit
// report is present; otherwise rewards visible citation tags.
class RuleJudge : public ModelProvider {
public:
    explicit RuleJudge(std::string id = "rule-judge") : id_(std::move(id)) {}
    std::string id() const override { return id_; }
    ScreenReply screen(const Abstract &, const DiseasePairConfig &) override { return {false, 0}; }
    std::vector<RawTriplet> extract(const Abstract &, const DiseasePairConfig &) override { return {}; }

    std::string complete(const std::string &, const std::string &user, const GenParams &) override {
        auto out_b = user.find("## AI-Generated Output\n");
        auto out_e = user.find("\n## ", out_b + 1);
        auto output = out_b == std::string::npos ? user : user.substr(out_b, out_e - out_b);
        int d1;
        if (contains(user, "contains **0 PubMed identifiers"))
            d1 = 1;
        else if (auto p = user.find("This output cites **"); p != std::string::npos) {
            static const std::regex rel("- \\*\\*(\\d+)\\*\\* \\(\\d+%\\) exist in PubMed and are clinically relevant");
            static const std::regex tot("cites \\*\\*(\\d+) unique PMIDs");
            std::smatch m1, m2;
            auto tail = user.substr(p);
            double frac = 0;
            if (std::regex_search(tail, m1, rel) && std::regex_search(tail, m2, tot))
                frac = std::stod(m1[1]) / std::max(1.0, std::stod(m2[1]));
            d1 = frac > 0.5 ? 5 : 2;
        } else
            d1 = contains(output, "[PMID:") ? 5 : 4;
        int d3 = extract_temporal_claims(output).count > 0 ? 5 : 3;
        json j{{"D1_verifiability", d1},          {"D2_actionability", 4}, {"D3_temporal_precision", d3},
               {"D4_nonexpert_safety", 4},        {"D5_clinical_completeness", 4},
               {"brief_justification", "Scored by rule."}};
        return j.dump();
    }

private:
    std::string id_;
};

// ---- aggregation ----

struct ScoreRecord {
    std::string pair;
    std::string scenario_id;
    Arm arm = Arm::vanilla;
    std::string judge;
    Round round = Round::v1;
    std::array<int, 5> d{};
};

inline ScoreRecord score_from_json(const json &j) {
    ScoreRecord r;
    r.pair = j.at("disease_pair").get<std::string>();
    r.scenario_id = j.at("scenario_id").get<std::string>();
    r.arm = parse_arm(j.at("arm").get<std::string>());
    r.judge = j.at("judge").get<std::string>();
    r.round = parse_round(j.value("round", "v1"));
    for (size_t i = 0; i < 5; ++i) {
        int v = j.at(kDimensionKeys[i]).get<int>();
        if (v < 1 || v > 5) throw ParseError(std::string(kDimensionKeys[i]) + " out of range", j.dump());
        r.d[i] = v;
    }
    return r;
}

inline json to_json(const ScoreRecord &r) {
    json j{{"disease_pair", r.pair}, {"scenario_id", r.scenario_id}, {"arm", arm_name(r.arm)},
           {"judge", r.judge},       {"round", round_name(r.round)}};
    for (size_t i = 0; i < 5; ++i) j[kDimensionKeys[i]] = r.d[i];
    return j;
}

struct CellStat {
    double mean = 0, sd = 0;
    size_t n = 0;
};

struct Comparison {
    std::string pair;
    size_t dim = 0;
    Arm baseline = Arm::vanilla;
    double delta = 0, d = 0, p = 1, p_bh = 1;
};

struct PanelTables {
    // key: (pair or "pooled", arm, dimension index)
    std::map<std::tuple<std::string, Arm, size_t>, CellStat> cells;
    std::vector<Comparison> comparisons;  // HEG vs each baseline, per pair and dimension
    std::vector<std::string> pairs;

    const CellStat *cell(const std::string &pair, Arm a, size_t dim) const {
        auto it = cells.find({pair, a, dim});
        return it == cells.end() ? nullptr : &it->second;
    }
    const Comparison *comparison(const std::string &pair, size_t dim, Arm baseline) const {
        for (auto &c : comparisons)
            if (c.pair == pair && c.dim == dim && c.baseline == baseline) return &c;
        return nullptr;
    }
};

// scores from one round; BH runs per dimension across all (pair x baseline) comparisons
inline PanelTables aggregate_panel(const std::vector<ScoreRecord> &scores) {
    PanelTables t;
    std::map<std::tuple<std::string, Arm, size_t>, std::vector<double>> raw;
    std::set<std::string> pairs;
    for (auto &s : scores) {
        pairs.insert(s.pair);
        for (size_t i = 0; i < 5; ++i) {
            raw[{s.pair, s.arm, i}].push_back(s.d[i]);
            raw[{"pooled", s.arm, i}].push_back(s.d[i]);
        }
    }
    t.pairs.assign(pairs.begin(), pairs.end());
    for (auto &[k, v] : raw) t.cells[k] = {stats::mean(v), stats::sd(v), v.size()};

    for (size_t dim = 0; dim < 5; ++dim) {
        std::vector<size_t> idx;
        for (auto &pair : t.pairs) {
            auto h = raw.find({pair, Arm::heg_tkg, dim});
            if (h == raw.end()) continue;
            for (auto base : {Arm::vanilla, Arm::guideline_rag}) {
                auto b = raw.find({pair, base, dim});
                if (b == raw.end()) continue;
                Comparison c{pair, dim, base};
                c.delta = stats::mean(h->second) - stats::mean(b->second);
                c.d = (b->second.size() > 1 && h->second.size() > 1) ? stats::cohens_d(b->second, h->second) : 0.0;
                c.p = stats::mann_whitney_u(h->second, b->second).p_value;
                idx.push_back(t.comparisons.size());
                t.comparisons.push_back(c);
            }
        }
        std::vector<double> ps;
        for (auto i : idx) ps.push_back(t.comparisons[i].p);
        auto q = stats::bh_correct(ps);
        for (size_t k = 0; k < idx.size(); ++k) t.comparisons[idx[k]].p_bh = q[k];
    }
    return t;
}

inline std::string signed_fixed(double v, int dp) { return (v >= 0 ? "+" : "") + fixed(v, dp); }

// Dimension | Vanilla | G-RAG | HEG-TKG | delta(H-V) | d
inline std::string render_panel_table(const PanelTables &t, const std::string &pair) {
    std::string out = "| Dimension | Vanilla | G-RAG | HEG-TKG | Delta(H-V) | d |\n|---|---|---|---|---|---|\n";
    for (size_t dim = 0; dim < 5; ++dim) {
        out += std::string("| ") + kDimensionNames[dim];
        for (auto a : {Arm::vanilla, Arm::guideline_rag, Arm::heg_tkg}) {
            auto *c = t.cell(pair, a, dim);
            out += " | " + (c ? fixed(c->mean, 2) + " +/- " + fixed(c->sd, 2) : std::string("-"));
        }
        auto *cmp = t.comparison(pair, dim, Arm::vanilla);
        out += " | " + (cmp ? signed_fixed(cmp->delta, 2) : std::string("-"));
        out += " | " + (cmp ? fixed(cmp->d, 2) : std::string("-")) + " |\n";
    }
    return out;
}

// ---- Type-II claim-support audit ----

struct ClaimPair {
    std::string scenario_id;
    std::string pair;
    std::string claim;
    std::string pmid;
    std::string tier;  // tier named in the citation tag; "" when absent
};

inline json to_json(const ClaimPair &c) {
    return json{{"scenario_id", c.scenario_id}, {"disease_pair", c.pair}, {"claim", c.claim},
                {"pmid", c.pmid},               {"tier", c.tier}};
}

inline ClaimPair claim_from_json(const json &j) {
    return {j.value("scenario_id", ""), j.at("disease_pair").get<std::string>(), j.at("claim").get<std::string>(),
            j.at("pmid").is_string() ? j.at("pmid").get<std::string>() : std::to_string(j.at("pmid").get<long>()),
            j.value("tier", "")};
}

inline const std::vector<std::string> &default_meta_patterns() {
    static const std::vector<std::string> p = {
        "\\b(GOLD|SILVER|BRONZE)\\s*=",
        "\\bTier\\s*1 curated",
        "cross-validated across multiple extraction models",
        "single study or single model",
        "\\bevidence (quality|tier)s?\\b.*\\b(note|summary|legend|key)\\b",
        "\\b(GOLD|SILVER|BRONZE)[- ]tier (evidence|citations?|claims?) (is|are|denotes?|indicates?|means?)\\b",
        "\\bquality tiers?\\b.*\\b(reflect|indicate|denote)",
    };
    return p;
}

inline std::vector<std::string> load_patterns(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);)
        if (!trim(l).empty() && trim(l)[0] != '#') out.push_back(trim(l));
    return out;
}

struct ScenarioText {
    std::string scenario_id;
    std::string pair;
    std::string text;
};

// one pair per (sentence, PMID in a tag); meta-statements about the tier scheme are dropped
inline std::vector<ClaimPair> extract_claims(const std::vector<ScenarioText> &outputs,
                                             const std::vector<std::string> &meta_patterns = default_meta_patterns(),
                                             size_t *filtered = nullptr) {
    static const std::regex tag("\\[PMID:[^\\]]*\\]", std::regex::icase);
    static const std::regex num("\\d{6,9}");
    static const std::regex tier_re("\\b(GOLD|SILVER|BRONZE)\\b", std::regex::icase);
    std::vector<std::regex> meta;
    for (auto &p : meta_patterns) meta.emplace_back(p, std::regex::icase);
    std::vector<ClaimPair> out;
    size_t dropped = 0;
    for (auto &o : outputs) {
        for (auto &sentence : segment_claims(o.text)) {
            if (!contains(sentence, "[PMID:")) continue;
            bool is_meta = false;
            for (auto &m : meta)
                if (std::regex_search(sentence, m)) is_meta = true;
            if (is_meta) {
                ++dropped;
                continue;
            }
            auto claim = collapse_ws(std::regex_replace(sentence, tag, ""));
            std::set<std::string> seen;
            for (std::sregex_iterator it(sentence.begin(), sentence.end(), tag), end; it != end; ++it) {
                auto t = it->str();
                std::smatch tm;
                std::string tier = std::regex_search(t, tm, tier_re) ? upper(tm[1].str()) : "";
                for (std::sregex_iterator n(t.begin(), t.end(), num); n != std::sregex_iterator(); ++n)
                    if (seen.insert(n->str()).second) out.push_back({o.scenario_id, o.pair, claim, n->str(), tier});
            }
        }
    }
    if (filtered) *filtered = dropped;
    return out;
}

struct SampleReport {
    std::vector<ClaimPair> sample;
    std::map<std::pair<std::string, std::string>, size_t> per_cell;
};

// cells are (disease pair, tier); the per-PMID cap is applied before allocation
inline SampleReport stratified_sample(std::vector<ClaimPair> pairs, size_t n = 200, uint64_t seed = 42,
                                      size_t floor = 12, size_t cap = 5) {
    std::sort(pairs.begin(), pairs.end(), [](const ClaimPair &a, const ClaimPair &b) {
        return std::tie(a.pair, a.tier, a.scenario_id, a.pmid, a.claim) <
               std::tie(b.pair, b.tier, b.scenario_id, b.pmid, b.claim);
    });
    stats::Rng rng(seed);
    rng.shuffle(pairs);

    std::map<std::string, size_t> per_pmid;
    std::map<std::pair<std::string, std::string>, std::vector<size_t>> cells;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (++per_pmid[pairs[i].pmid] > cap) continue;
        cells[{pairs[i].pair, pairs[i].tier}].push_back(i);
    }
    size_t capacity = 0;
    for (auto &[_, v] : cells) capacity += v.size();
    if (capacity < n)
        throw Error("stratified_sample: " + std::to_string(capacity) + " eligible rows after the per-PMID cap, " +
                    std::to_string(n - capacity) + " short of " + std::to_string(n));

    const size_t k = cells.size();
    std::map<std::pair<std::string, std::string>, size_t> quota;
    size_t assigned = 0;
    for (auto &[c, v] : cells) {
        quota[c] = std::min(v.size(), std::max(floor, n / k));
        assigned += quota[c];
    }
    // trim overshoot from the largest quotas, never below the floor
    while (assigned > n) {
        auto it = std::max_element(quota.begin(), quota.end(), [](auto &a, auto &b) { return a.second < b.second; });
        if (it->second == 0) break;
        --it->second;
        --assigned;
    }
    // shortfall: largest-remainder split proportional to remaining capacity
    while (assigned < n) {
        const size_t need = n - assigned;
        double room = 0;
        for (auto &[c, v] : cells) room += double(v.size() - quota[c]);
        std::vector<std::tuple<double, std::pair<std::string, std::string>>> rem;
        size_t given = 0;
        for (auto &[c, v] : cells) {
            double share = need * double(v.size() - quota[c]) / room;
            size_t whole = std::min(v.size() - quota[c], static_cast<size_t>(std::floor(share)));
            quota[c] += whole;
            given += whole;
            if (quota[c] < v.size()) rem.push_back({share - std::floor(share), c});
        }
        std::stable_sort(rem.begin(), rem.end(), [](auto &a, auto &b) { return std::get<0>(a) > std::get<0>(b); });
        for (auto &[_, c] : rem) {
            if (given >= need) break;
            if (quota[c] < cells[c].size()) {
                ++quota[c];
                ++given;
            }
        }
        assigned += given;
    }

    SampleReport r;
    std::vector<size_t> picked;
    for (auto &[c, v] : cells) {
        r.per_cell[c] = quota[c];
        picked.insert(picked.end(), v.begin(), v.begin() + static_cast<long>(quota[c]));
    }
    std::sort(picked.begin(), picked.end());
    for (auto i : picked) r.sample.push_back(pairs[i]);
    return r;
}

enum class NliLabel { ENTAILS, NEUTRAL, CONTRADICTS };

inline const char *nli_name(NliLabel l) {
    return l == NliLabel::ENTAILS ? "ENTAILS" : l == NliLabel::NEUTRAL ? "NEUTRAL" : "CONTRADICTS";
}

inline std::optional<NliLabel> parse_nli_label(const std::string &s) {
    auto u = upper(trim(s));
    if (u == "ENTAILS") return NliLabel::ENTAILS;
    if (u == "NEUTRAL") return NliLabel::NEUTRAL;
    if (u == "CONTRADICTS") return NliLabel::CONTRADICTS;
    return std::nullopt;
}

struct NliVerdict {
    std::string claim;
    std::string pmid;
    std::string pair;
    std::string tier;
    NliLabel label = NliLabel::NEUTRAL;
    double confidence = 0;
};

inline NliVerdict verdict_from_json(const json &j) {
    NliVerdict v;
    v.claim = j.value("claim", "");
    v.pmid = j.at("pmid").is_string() ? j.at("pmid").get<std::string>() : std::to_string(j.at("pmid").get<long>());
    v.pair = j.value("disease_pair", "");
    v.tier = upper(j.value("tier", ""));
    auto l = parse_nli_label(j.at("label").get<std::string>());
    if (!l) throw ParseError("unknown NLI label", j.dump());
    v.label = *l;
    v.confidence = j.value("confidence", 0.0);
    return v;
}

inline json to_json(const NliVerdict &v) {
    return json{{"claim", v.claim}, {"pmid", v.pmid},         {"disease_pair", v.pair},
                {"tier", v.tier},   {"label", nli_name(v.label)}, {"confidence", v.confidence}};
}

inline const std::string kNliSystem =
    "You are auditing whether a cited PubMed abstract supports a clinical claim.\n"
    "Label the (claim, abstract) pair with exactly one of:\n"
    "- ENTAILS: the abstract directly states, demonstrates, or implies the claim.\n"
    "- NEUTRAL: the abstract is on-topic but does not directly assert the specific claim.\n"
    "- CONTRADICTS: the abstract refutes the claim.\n"
    "PubMed abstracts of review or guideline papers are typically meta-summaries that describe the\n"
    "paper's structure rather than detailed clinical findings. If the specific claim is simply absent\n"
    "from the abstract, the label is NEUTRAL, not CONTRADICTS.\n"
    "Respond ONLY with a JSON object: {\"label\": \"ENTAILS|NEUTRAL|CONTRADICTS\", \"confidence\": <0-1>, "
    "\"rationale\": \"<one sentence>\"}\n";

inline std::string nli_user_prompt(const std::string &claim, const std::string &pmid, const std::string &title,
                                   const std::string &abstract) {
    return "Claim: " + claim + "\nCited PMID: " + pmid + "\nTitle: " + title + "\nAbstract: " + abstract + "\n";
}

inline NliVerdict parse_nli_reply(const std::string &reply) {
    auto j = extract_json_object(reply);
    if (!j.contains("label") || !j["label"].is_string()) throw ParseError("missing label", reply);
    auto l = parse_nli_label(j["label"].get<std::string>());
    if (!l) throw ParseError("unknown label", reply);
    NliVerdict v;
    v.label = *l;
    if (j.contains("confidence") && j["confidence"].is_number()) v.confidence = j["confidence"].get<double>();
    if (v.confidence < 0 || v.confidence > 1) throw ParseError("confidence outside [0,1]", reply);
    return v;
}

inline std::optional<NliVerdict> nli_judge(const ClaimPair &c, const std::string &title, const std::string &abstract,
                                           ModelProvider &provider) {
    GenParams p;
    p.json_mode = true;
    auto user = nli_user_prompt(c.claim, c.pmid, title, abstract);
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto reply = provider.complete(kNliSystem, attempt ? user + judge_text::kReprompt : user, p);
        try {
            auto v = parse_nli_reply(reply);
            v.claim = c.claim;
            v.pmid = c.pmid;
            v.pair = c.pair;
            v.tier = c.tier;
            return v;
        } catch (const ParseError &e) {
            log(LogLevel::Warn, "nli " + c.pmid + ": " + e.what());
        }
    }
    return std::nullopt;
}

struct RateCI {
    size_t count = 0;
    double rate = 0;
    std::pair<double, double> ci{0, 0};
};

struct TierRow {
    std::string tier;
    size_t n = 0, entails = 0, neutral = 0, contradicts = 0;
    double entailment() const { return n ? double(entails) / n : 0; }
    double non_contradiction() const { return n ? double(entails + neutral) / n : 0; }
};

struct NliSummary {
    size_t n = 0;
    RateCI entails, neutral, contradicts, non_contradiction;
    std::vector<TierRow> tiers;  // GOLD, SILVER, BRONZE then any others
    TierRow total;
};

inline NliSummary aggregate_nli(const std::vector<NliVerdict> &v, uint64_t seed = 42, size_t resamples = 10000) {
    if (v.empty()) throw Error("aggregate_nli: no verdicts");
    NliSummary s;
    s.n = v.size();
    auto rate = [&](auto pred, bool with_ci) {
        std::vector<double> ind;
        for (auto &x : v) ind.push_back(pred(x) ? 1.0 : 0.0);
        RateCI r;
        for (double d : ind) r.count += d > 0;
        r.rate = double(r.count) / double(v.size());
        if (with_ci) r.ci = stats::bootstrap_ci(ind, stats::mean, resamples, seed);
        return r;
    };
    s.entails = rate([](auto &x) { return x.label == NliLabel::ENTAILS; }, true);
    s.neutral = rate([](auto &x) { return x.label == NliLabel::NEUTRAL; }, false);
    s.contradicts = rate([](auto &x) { return x.label == NliLabel::CONTRADICTS; }, true);
    s.non_contradiction = rate([](auto &x) { return x.label != NliLabel::CONTRADICTS; }, true);

    std::map<std::string, TierRow> by;
    for (auto &x : v) {
        for (auto *row : {&by[x.tier], &s.total}) {
            ++row->n;
            (x.label == NliLabel::ENTAILS ? row->entails : x.label == NliLabel::NEUTRAL ? row->neutral : row->contradicts)++;
        }
    }
    s.total.tier = "Total";
    for (auto t : {"GOLD", "SILVER", "BRONZE"})
        if (by.count(t)) {
            by[t].tier = t;
            s.tiers.push_back(by[t]);
            by.erase(t);
        }
    for (auto &[t, row] : by) {
        row.tier = t.empty() ? "UNTAGGED" : t;
        s.tiers.push_back(row);
    }
    return s;
}

inline std::string render_nli_summary(const NliSummary &s) {
    auto pct = [](double x) { return fixed(100 * x, 1) + "%"; };
    auto ci = [&](const RateCI &r) { return "(" + pct(r.ci.first) + ", " + pct(r.ci.second) + ")"; };
    std::string out = "| Label | n | Rate | 95% CI |\n|---|---|---|---|\n";
    out += "| ENTAILS | " + std::to_string(s.entails.count) + " | " + pct(s.entails.rate) + " | " + ci(s.entails) + " |\n";
    out += "| NEUTRAL | " + std::to_string(s.neutral.count) + " | " + pct(s.neutral.rate) + " | --- |\n";
    out += "| CONTRADICTS | " + std::to_string(s.contradicts.count) + " | " + pct(s.contradicts.rate) + " | " +
           ci(s.contradicts) + " |\n";
    out += "| Non-contradiction | " + std::to_string(s.non_contradiction.count) + " | " + pct(s.non_contradiction.rate) +
           " | " + ci(s.non_contradiction) + " |\n\n";
    out += "| Tier | n | ENTAILS | NEUTRAL | CONTRADICTS | Entailment | Non-contradiction |\n|---|---|---|---|---|---|---|\n";
    auto row = [&](const TierRow &r) {
        return "| " + r.tier + " | " + std::to_string(r.n) + " | " + std::to_string(r.entails) + " | " +
               std::to_string(r.neutral) + " | " + std::to_string(r.contradicts) + " | " + pct(r.entailment()) + " | " +
               pct(r.non_contradiction()) + " |\n";
    };
    for (auto &r : s.tiers) out += row(r);
    out += row(s.total);
    return out;
}

}  // namespace provgraph
