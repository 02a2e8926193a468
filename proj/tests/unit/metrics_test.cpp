#include <gtest/gtest.h>

#include <random>

#include <provgraph/evalmetrics.hpp>

using namespace provgraph;

namespace {

std::string words(size_t n) {
    std::string s;
    for (size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
    return s;
}

}  // namespace

TEST(FeatureCoverage, Examples) {
    std::vector<std::string> f = {"Gowers sign", "calf pseudohypertrophy", "elevated CK", "dystrophin"};
    EXPECT_DOUBLE_EQ(feature_coverage("gowers sign, calf pseudohypertrophy, elevated ck, absent dystrophin", f), 1.0);
    EXPECT_DOUBLE_EQ(feature_coverage("Gowers sign with calf pseudohypertrophy and elevated CK", f), 0.75);
    EXPECT_DOUBLE_EQ(feature_coverage("The rule is fulfilled in ~90% of DMD cases.", {"reading frame rule 90-95% accuracy"}), 0.0);
    EXPECT_THROW(feature_coverage("x", {}), Error);
}

TEST(Traceability, Examples) {
    std::string ten;
    for (int i = 0; i < 10; ++i)
        ten += "Claim number " + std::to_string(i) + " is stated here" + (i < 4 ? " [PMID:2939598" + std::to_string(i) + ", GOLD]" : "") + ". ";
    EXPECT_EQ(segment_claims(ten).size(), 10u);
    EXPECT_DOUBLE_EQ(evidence_traceability(ten), 0.4);
    EXPECT_DOUBLE_EQ(evidence_traceability("Loss of ambulation occurs around age eleven without citation."), 0.0);
    EXPECT_DOUBLE_EQ(evidence_traceability("Loss of ambulation occurs around age 11 [PMID:35501714, BRONZE]."), 1.0);
    EXPECT_DOUBLE_EQ(evidence_traceability(""), 0.0);
}

TEST(Traceability, MarkupStripped) {
    std::string md =
        "## Differential Diagnosis\n"
        "| Feature | DMD | BMD |\n"
        "|---|---|---|\n"
        "| Age at wheelchair | before 13 | after 16 |\n"
        "- **Onset** of weakness is early in DMD [PMID:29395989, GOLD].\n"
        "1. Cardiomyopathy develops in most adult patients.\n"
        "Short one.\n";
    auto c = segment_claims(md);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0], "Age at wheelchair before 13 after 16");
    c.erase(c.begin());
    EXPECT_EQ(c[0].rfind("Onset of weakness", 0), 0u);
    EXPECT_DOUBLE_EQ(evidence_traceability(md), 1.0 / 3.0);
}

TEST(ProvenanceGap, Examples) {
    EXPECT_NEAR(provenance_gap(0.38, 0.45, 0.97), 0.0, 1e-12);
    EXPECT_NEAR(provenance_gap(0.75, 0.00, 0.80), 0.75, 1e-12);
    EXPECT_NEAR(provenance_gap(0.75, 0.73, 0.97), 0.04, 0.005);
    EXPECT_THROW(provenance_gap(1.2, 0, 0.97), Error);
    EXPECT_THROW(provenance_gap(0.5, -0.1, 0.97), Error);
    EXPECT_THROW(provenance_gap(0.5, 0.1, std::nan("")), Error);
}

TEST(ProvenanceGap, BoundedAndMonotone) {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 5000; ++t) {
        double fc = u(gen), ets = u(gen), r = u(gen), d = u(gen) * 0.2;
        double pg = provenance_gap(fc, ets, r);
        EXPECT_GE(pg, 0.0);
        EXPECT_LE(pg, fc);
        EXPECT_LE(provenance_gap(fc, std::min(1.0, ets + d), r), pg + 1e-12);
        EXPECT_GE(provenance_gap(std::min(1.0, fc + d), ets, r), pg - 1e-12);
    }
}

TEST(Reliability, PerArm) {
    EXPECT_DOUBLE_EQ(reliability_coefficient(Arm::heg_tkg), 0.97);
    EXPECT_DOUBLE_EQ(reliability_coefficient(Arm::vanilla), 0.80);
    EXPECT_DOUBLE_EQ(reliability_coefficient(Arm::guideline_rag), 0.50);
}

TEST(CitationDensity, Examples) {
    EXPECT_DOUBLE_EQ(citation_density(words(1000)), 0.0);
    EXPECT_DOUBLE_EQ(citation_density(words(499) + " [PMID:29395989]"), 2.0);
    EXPECT_NEAR(29.7 / 1246 * 1000, 23.8, 0.05);
    EXPECT_THROW(citation_density("   "), Error);
    // ratio of sums, not mean of ratios
    EXPECT_DOUBLE_EQ(aggregate_citation_density({words(99) + " PMID:10000001", words(899) + " PMID:10000002"}), 2.0);
}

TEST(TemporalClaims, ReExported) {
    EXPECT_EQ(temporal_claims(""), 0u);
    EXPECT_EQ(temporal_claims("Gowers' sign at P3Y-P5Y; loss of ambulation around age 11"), 2u);
}

TEST(ComputeMetrics, Combines) {
    auto text = "Gowers sign appears in early childhood [PMID:29395989, GOLD]. Calf hypertrophy is common in affected boys.";
    auto m = compute_metrics(text, {"Gowers sign", "calf hypertrophy"}, Arm::heg_tkg);
    EXPECT_DOUBLE_EQ(m.fc, 1.0);
    EXPECT_DOUBLE_EQ(m.ets, 0.5);
    EXPECT_DOUBLE_EQ(m.r, 0.97);
    EXPECT_NEAR(m.pg, 1.0 - 0.5 * 0.97, 1e-12);
}

TEST(ScenarioMetrics, ReferenceTable) {
    auto rows = load_scenario_metrics(std::string(PROVGRAPH_DATA_DIR) + "/reference/scenario_metrics.csv");
    ASSERT_EQ(rows.size(), 36u);
    std::map<std::string, int> per_pair;
    for (auto &r : rows) {
        per_pair[r.scenario_id.substr(0, r.scenario_id.find('_', r.scenario_id.find('_') + 1))]++;
        EXPECT_DOUBLE_EQ(r.vanilla.ets, 0.0) << r.scenario_id;
        EXPECT_DOUBLE_EQ(r.rag.ets, 0.0) << r.scenario_id;
    }
    EXPECT_EQ(per_pair.size(), 3u);
    for (auto &[k, n] : per_pair) EXPECT_EQ(n, 12) << k;
    EXPECT_EQ(metrics_table_header() + metrics_table_row(rows[0]),
              metrics_table_header() + metrics_table_row(load_scenario_metrics(std::string(PROVGRAPH_DATA_DIR) + "/reference/scenario_metrics.csv")[0]));
}
