#include <gtest/gtest.h>

#include <random>

#include <provgraph/judgepanel.hpp>

using namespace provgraph;

namespace {

std::vector<JudgeCase> cases(size_t scenarios) {
    std::vector<JudgeCase> out;
    for (size_t i = 0; i < scenarios; ++i)
        for (auto a : kArms)
            out.push_back({"S" + std::to_string(i), a, "scenario " + std::to_string(i), std::string("output ") + arm_name(a)});
    return out;
}

std::string remove_once(std::string s, const std::string &part) {
    auto at = s.find(part);
    if (at != std::string::npos) s.erase(at, part.size());
    return s;
}

class ScriptedJudge : public ModelProvider {
public:
    explicit ScriptedJudge(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string id() const override { return "scripted"; }
    ScreenReply screen(const Abstract &, const DiseasePairConfig &) override { return {}; }
    std::vector<RawTriplet> extract(const Abstract &, const DiseasePairConfig &) override { return {}; }
    std::string complete(const std::string &, const std::string &, const GenParams &) override {
        return replies_.at(std::min(calls++, replies_.size() - 1));
    }
    size_t calls = 0;

private:
    std::vector<std::string> replies_;
};

std::vector<ClaimPair> synthetic_pairs(size_t per_cell_scale, uint64_t seed) {
    std::mt19937 gen(static_cast<unsigned>(seed));
    std::vector<ClaimPair> out;
    const char *pairs[] = {"mg_lems", "dmd_bmd", "cidp_gbs"};
    const char *tiers[] = {"GOLD", "SILVER", "BRONZE"};
    for (size_t p = 0; p < 3; ++p)
        for (size_t t = 0; t < 3; ++t) {
            size_t n = (t == 0 ? 5 : t == 1 ? 15 : 80) * per_cell_scale;
            for (size_t i = 0; i < n; ++i) {
                // a few PMIDs are heavy hitters
                auto pmid = std::to_string(10000000 + (gen() % 10 == 0 ? gen() % 3 : gen() % 5000));
                out.push_back({"S" + std::to_string(i % 12), pairs[p], "claim " + std::to_string(out.size()), pmid, tiers[t]});
            }
        }
    return out;
}

}  // namespace

TEST(Blinding, DeterministicAndComplete) {
    auto c = cases(36);
    auto [b1, k1] = blind_and_shuffle(c, 42);
    auto [b2, k2] = blind_and_shuffle(c, 42);
    ASSERT_EQ(b1.size(), 108u);
    EXPECT_EQ(k1, k2);
    for (size_t i = 0; i < b1.size(); ++i) EXPECT_EQ(b1[i].blind_id, b2[i].blind_id);
    std::set<std::pair<std::string, Arm>> back;
    for (auto &[id, v] : k1) back.insert(v);
    EXPECT_EQ(back.size(), 108u);
    for (auto &b : b1) {
        EXPECT_EQ(b.output_text.find(b.blind_id), std::string::npos);
        EXPECT_EQ(b.blind_id.find("S"), std::string::npos);
    }
    auto [b3, k3] = blind_and_shuffle(c, 43);
    std::vector<std::string> o1, o3;
    for (auto &b : b1) o1.push_back(k1[b.blind_id].first + arm_name(k1[b.blind_id].second));
    for (auto &b : b3) o3.push_back(k3[b.blind_id].first + arm_name(k3[b.blind_id].second));
    EXPECT_NE(o1, o3);
    c.push_back(c.front());
    EXPECT_THROW(blind_and_shuffle(c), Error);
}

TEST(Likert, Parse) {
    auto s = parse_likert(
        "Here: {\"D1_verifiability\": 5, \"D2_actionability\": 4, \"D3_temporal_precision\": 3, "
        "\"D4_nonexpert_safety\": 2, \"D5_clinical_completeness\": 1, \"brief_justification\": \"ok\"}");
    EXPECT_EQ(s.d, (std::array<int, 5>{5, 4, 3, 2, 1}));
    EXPECT_EQ(s.brief_justification, "ok");
    EXPECT_THROW(parse_likert("{\"D1_verifiability\": 5, \"D2_actionability\": 4, \"D3_temporal_precision\": 3, "
                              "\"D5_clinical_completeness\": 1}"),
                 ParseError);
    EXPECT_THROW(parse_likert("{\"D1_verifiability\": 6, \"D2_actionability\": 4, \"D3_temporal_precision\": 3, "
                              "\"D4_nonexpert_safety\": 2, \"D5_clinical_completeness\": 1}"),
                 ParseError);
    EXPECT_THROW(parse_likert("no json here"), ParseError);
}

TEST(JudgeCase, RepromptThenGiveUp) {
    BlindCase c{"case-1", "scenario", "output"};
    ScriptedJudge bad({"garbage", "still garbage"});
    EXPECT_FALSE(judge_case(c, Round::v1, nullptr, bad).has_value());
    EXPECT_EQ(bad.calls, 2u);
    ScriptedJudge late({"garbage", RuleJudge().complete("", "## AI-Generated Output\nx\n", {})});
    auto s = judge_case(c, Round::v1, nullptr, late);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->judge, "scripted");
    EXPECT_THROW(judge_case(c, Round::v2, nullptr, late), Error);
}

TEST(JudgeCase, V2ZeroAuditScoresLowD1) {
    auto cfg = load_config_file(std::string(PROVGRAPH_DATA_DIR) + "/pairs/mg_lems.yaml");
    FixtureIndex idx;
    BlindCase c{"case-2", "A 45-year-old with ptosis.", "Myasthenia gravis is likely; consider AChR antibodies."};
    auto audit = audit_text("o", c.output_text, cfg, idx);
    RuleJudge judge;
    auto v2 = judge_case(c, Round::v2, &audit, judge);
    ASSERT_TRUE(v2.has_value());
    EXPECT_LE(v2->d[0], 2);
    auto v1 = judge_case(c, Round::v1, nullptr, judge);
    EXPECT_GT(v1->d[0], v2->d[0]);
}

TEST(JudgePrompt, RoundsDifferOnlyByAuditAndInstruction) {
    auto report = render_audit_report(CitationAudit{});
    auto v1 = judge_prompt(Round::v1, "scenario", "output");
    auto v2 = judge_prompt(Round::v2, "scenario", "output", report);
    EXPECT_NE(v2.find(report), std::string::npos);
    EXPECT_NE(v2.find(judge_text::kD1Instruction), std::string::npos);
    EXPECT_EQ(remove_once(remove_once(v2, "\n" + report), judge_text::kD1Instruction), v1);
    EXPECT_LT(v2.find(report), v2.find(judge_text::kD1Instruction));
}

TEST(Panel, PermutationInvariant) {
    std::vector<ScoreRecord> s;
    std::mt19937 gen(1);
    for (auto pair : {"mg_lems", "dmd_bmd"})
        for (int sc = 0; sc < 12; ++sc)
            for (auto a : kArms)
                for (auto j : {"j1", "j2", "j3"}) {
                    ScoreRecord r;
                    r.pair = pair;
                    r.scenario_id = std::string(pair) + std::to_string(sc);
                    r.arm = a;
                    r.judge = j;
                    for (auto &d : r.d) d = 1 + static_cast<int>(gen() % 5) + (a == Arm::heg_tkg && gen() % 2);
                    for (auto &d : r.d) d = std::min(d, 5);
                    s.push_back(r);
                }
    auto t = aggregate_panel(s);
    auto shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    auto u = aggregate_panel(shuffled);
    for (auto pair : {"mg_lems", "dmd_bmd", "pooled"}) EXPECT_EQ(render_panel_table(t, pair), render_panel_table(u, pair));
    ASSERT_EQ(t.comparisons.size(), 5u * 2 * 2);
    for (size_t i = 0; i < t.comparisons.size(); ++i) {
        EXPECT_NEAR(t.comparisons[i].p_bh, u.comparisons[i].p_bh, 1e-12);
        EXPECT_GE(t.comparisons[i].p_bh, t.comparisons[i].p - 1e-15);
    }
    EXPECT_EQ(t.cell("mg_lems", Arm::vanilla, 0)->n, 36u);
    EXPECT_EQ(t.cell("pooled", Arm::heg_tkg, 4)->n, 72u);
}

TEST(Panel, SingleArmHasNoDeltas) {
    ScoreRecord r;
    r.pair = "mg_lems";
    r.arm = Arm::heg_tkg;
    r.d = {5, 4, 3, 4, 4};
    auto t = aggregate_panel({r, r});
    EXPECT_TRUE(t.comparisons.empty());
    auto table = render_panel_table(t, "mg_lems");
    EXPECT_NE(table.find("| D1 Verifiability | - | - | 5.00 +/- 0.00 | - | - |"), std::string::npos);
}

TEST(Claims, ExtractionAndMetaFilter) {
    std::vector<ScenarioText> outs = {
        {"S1", "dmd_bmd",
         "Gowers sign appears between three and five years [PMID:29395989, GOLD] [PMID:35501714, BRONZE]. "
         "GOLD = guideline confirmed evidence across sources [PMID:29395989]. "
         "Untagged sentence with enough words here."}};
    size_t filtered = 0;
    auto c = extract_claims(outs, default_meta_patterns(), &filtered);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(filtered, 1u);
    EXPECT_EQ(c[0].claim, "Gowers sign appears between three and five years");
    EXPECT_EQ(c[0].pmid, "29395989");
    EXPECT_EQ(c[0].tier, "GOLD");
    EXPECT_EQ(c[1].pmid, "35501714");
    EXPECT_EQ(c[1].tier, "BRONZE");
    EXPECT_TRUE(extract_claims({{"S2", "dmd_bmd", "Nothing cited in this output at all."}}).empty());
}

TEST(Sampling, CapFloorAndSize) {
    auto pairs = synthetic_pairs(1, 7);
    auto r = stratified_sample(pairs, 200, 42, 12, 5);
    EXPECT_EQ(r.sample.size(), 200u);
    std::map<std::string, size_t> per_pmid;
    std::map<std::pair<std::string, std::string>, size_t> per_cell, avail;
    for (auto &p : r.sample) {
        per_pmid[p.pmid]++;
        per_cell[{p.pair, p.tier}]++;
    }
    for (auto &[_, n] : per_pmid) EXPECT_LE(n, 5u);
    EXPECT_EQ(per_cell, r.per_cell);
    for (auto &p : pairs) avail[{p.pair, p.tier}]++;
    for (auto &[cell, n] : per_cell) EXPECT_GE(n, std::min<size_t>(12, avail[cell] >= 12 ? 12 : 0)) << cell.first << cell.second;
    // GOLD cells hold 5 rows: all of them are taken and the rest is redistributed
    EXPECT_EQ(r.per_cell[std::make_pair(std::string("mg_lems"), std::string("GOLD"))], 5u);
}

TEST(Sampling, DeterministicAndShortfall) {
    auto pairs = synthetic_pairs(1, 9);
    auto a = stratified_sample(pairs, 200, 42);
    auto shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(4));
    auto b = stratified_sample(shuffled, 200, 42);
    ASSERT_EQ(a.sample.size(), b.sample.size());
    for (size_t i = 0; i < a.sample.size(); ++i) EXPECT_EQ(to_json(a.sample[i]), to_json(b.sample[i]));
    std::vector<ClaimPair> few(20, ClaimPair{"S", "mg_lems", "c", "10000001", "GOLD"});
    try {
        stratified_sample(few, 200);
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("short of 200"), std::string::npos);
    }
}

TEST(Nli, ParseReply) {
    auto v = parse_nli_reply("{\"label\": \"entails\", \"confidence\": 0.9, \"rationale\": \"x\"}");
    EXPECT_EQ(v.label, NliLabel::ENTAILS);
    EXPECT_DOUBLE_EQ(v.confidence, 0.9);
    EXPECT_THROW(parse_nli_reply("{\"label\": \"MAYBE\"}"), ParseError);
    EXPECT_THROW(parse_nli_reply("{\"label\": \"NEUTRAL\", \"confidence\": 1.5}"), ParseError);
}

TEST(Nli, Aggregate) {
    std::vector<NliVerdict> all(50, NliVerdict{"c", "1", "p", "GOLD", NliLabel::ENTAILS, 1});
    auto s = aggregate_nli(all);
    EXPECT_DOUBLE_EQ(s.entails.rate, 1.0);
    EXPECT_EQ(s.entails.ci, std::make_pair(1.0, 1.0));

    std::vector<NliVerdict> v;
    for (int i = 0; i < 200; ++i)
        v.push_back({"c", std::to_string(i), "p", i % 3 == 0 ? "GOLD" : i % 3 == 1 ? "SILVER" : "BRONZE",
                     i < 2 ? NliLabel::CONTRADICTS : i < 120 ? NliLabel::NEUTRAL : NliLabel::ENTAILS, 0.8});
    auto t = aggregate_nli(v);
    EXPECT_EQ(t.contradicts.count, 2u);
    EXPECT_DOUBLE_EQ(t.contradicts.rate, 0.01);
    EXPECT_DOUBLE_EQ(t.contradicts.ci.first, 0.0);
    EXPECT_NEAR(t.contradicts.ci.second, 0.025, 0.006);
    EXPECT_DOUBLE_EQ(t.non_contradiction.rate, 0.99);
    ASSERT_EQ(t.tiers.size(), 3u);
    EXPECT_EQ(t.tiers[0].tier, "GOLD");
    EXPECT_EQ(t.total.n, 200u);
    auto table = render_nli_summary(t);
    EXPECT_NE(table.find("| CONTRADICTS | 2 | 1.0% |"), std::string::npos);
    EXPECT_EQ(table, render_nli_summary(aggregate_nli(v)));
    EXPECT_THROW(aggregate_nli({}), Error);
}
