#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include <provgraph/citeverify.hpp>

using namespace provgraph;

namespace {

DiseasePairConfig mg() { return load_config_file(std::string(PROVGRAPH_DATA_DIR) + "/pairs/mg_lems.yaml"); }

void fill(FixtureIndex &idx) {
    idx.put({"29395989", true, "Myasthenia gravis: diagnosis and management", "Neurology", {}});
    idx.put({"31112222", true, "Checkpoint inhibitors in melanoma", "Lancet Oncology", {}});
    idx.put({"31113333", true, "Outcomes after surgery", "J Thorac Surg", {"Myasthenia Gravis"}});
}

const char *kEsummary = R"(<?xml version="1.0" encoding="UTF-8" ?>
<!DOCTYPE eSummaryResult PUBLIC "-//NLM//DTD esummary v1 20041029//EN" "https://eutils.ncbi.nlm.nih.gov/eutils/dtd/20041029/esummary-v1.dtd">
<eSummaryResult>
<DocSum>
	<Id>29395989</Id>
	<Item Name="PubDate" Type="Date">2018 Mar</Item>
	<Item Name="Source" Type="String">Lancet Neurol</Item>
	<Item Name="Title" Type="String">Diagnosis and management of Duchenne muscular dystrophy, part 1.</Item>
	<Item Name="FullJournalName" Type="String">The Lancet. Neurology</Item>
</DocSum>
</eSummaryResult>)";

}  // namespace

TEST(ExtractPmids, Examples) {
    EXPECT_EQ(extract_pmids("see [PMID:29395989, GOLD]"), std::vector<std::string>{"29395989"});
    EXPECT_TRUE(extract_pmids("PMID: 12345").empty());
    EXPECT_EQ(extract_pmids("PMID:29395989 and again PMID:29395989"), std::vector<std::string>{"29395989"});
    EXPECT_EQ(extract_pmids("[PMID:35501714, BRONZE] then pmid 29395989"),
              (std::vector<std::string>{"35501714", "29395989"}));
    EXPECT_TRUE(extract_pmids("PMID:1234567890").empty());
    EXPECT_TRUE(extract_pmids("").empty());
}

TEST(Esummary, Parse) {
    auto r = parse_esummary_xml("29395989", kEsummary);
    EXPECT_TRUE(r.exists);
    EXPECT_EQ(r.title, "Diagnosis and management of Duchenne muscular dystrophy, part 1.");
    EXPECT_EQ(r.journal, "The Lancet. Neurology");
    auto missing = parse_esummary_xml("99999999", "<eSummaryResult><ERROR>Empty id list</ERROR></eSummaryResult>");
    EXPECT_FALSE(missing.exists);
    auto errored = parse_esummary_xml(
        "99999999", "<eSummaryResult><DocSum><Id>99999999</Id><Item Name=\"error\">cannot get document summary</Item></DocSum></eSummaryResult>");
    EXPECT_FALSE(errored.exists);
    try {
        parse_esummary_xml("1", "<html>oops");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.raw, "<html>oops");
    }
}

TEST(FixtureIndex, LookupAndPersistence) {
    FixtureIndex idx;
    fill(idx);
    auto r = idx.fetch_summary("29395989");
    EXPECT_TRUE(r.exists);
    EXPECT_EQ(r.journal, "Neurology");
    EXPECT_FALSE(idx.fetch_summary("10000000").exists);
    auto path = (std::filesystem::temp_directory_path() / "pg_index_test.json").string();
    idx.save(path);
    FixtureIndex back(path);
    EXPECT_EQ(back.size(), 3u);
    EXPECT_EQ(back.fetch_summary("31113333").mesh_terms, std::vector<std::string>{"Myasthenia Gravis"});
    std::remove(path.c_str());
    EXPECT_THROW(FixtureIndex("/nonexistent/index.json"), Error);
}

TEST(RateLimiter, TenCallsOnMockClock) {
    MockClock clock;
    RateLimiter lim(clock);
    double first = lim.acquire();
    for (int i = 1; i < 10; ++i) lim.acquire();
    EXPECT_GE(clock.now() - first, 3.15 - 1e-9);
}

TEST(RateLimiter, NoWaitAfterIdle) {
    MockClock clock;
    RateLimiter lim(clock);
    lim.acquire();
    clock.advance(5);
    EXPECT_DOUBLE_EQ(lim.acquire(), 5.0);
    EXPECT_DOUBLE_EQ(lim.acquire(), 5.35);
}

TEST(LiveClient, CachesAndLimits) {
    MockClock clock;
    FixtureIndex cache;
    int calls = 0;
    LiveClient client(
        [&](const std::string &) {
            ++calls;
            return std::string(kEsummary);
        },
        clock, &cache);
    for (int i = 0; i < 3; ++i) EXPECT_TRUE(client.fetch_summary("29395989").exists);
    EXPECT_EQ(calls, 1);
    EXPECT_TRUE(cache.has("29395989"));
    for (int i = 0; i < 10; ++i) client.fetch_summary(std::to_string(30000000 + i));
    EXPECT_EQ(calls, 11);
    EXPECT_GE(clock.now(), 10 * kEutilsSpacing - 1e-9);
}

TEST(ClassifyRelevance, Examples) {
    auto cfg = mg();
    EXPECT_EQ(classify_relevance({"1", true, "Myasthenia gravis: diagnosis", "", {}}, cfg), Verdict::Relevant);
    EXPECT_EQ(classify_relevance({"2", true, "Checkpoint inhibitors in melanoma", "", {}}, cfg), Verdict::WrongField);
    EXPECT_EQ(classify_relevance({"3", false, "", "", {}}, cfg), Verdict::NotFound);
    PubMedRecord mesh{"4", true, "Outcomes after surgery", "", {"Myasthenia Gravis"}};
    EXPECT_EQ(classify_relevance(mesh, cfg), Verdict::Relevant);
    EXPECT_EQ(classify_relevance(mesh, cfg, true), Verdict::WrongField);
}

TEST(Audit, Partition) {
    auto cfg = mg();
    FixtureIndex idx;
    fill(idx);
    auto a = audit_text("o1", "A [PMID:29395989, GOLD]. B [PMID:31112222]. C [PMID:40000001]. D [PMID:31113333].", cfg, idx);
    EXPECT_EQ(a.total(), 4u);
    EXPECT_EQ(a.relevant, 2u);
    EXPECT_EQ(a.wrong_field, 1u);
    EXPECT_EQ(a.not_found, 1u);
    EXPECT_EQ(a.relevant + a.wrong_field + a.not_found, a.total());
    auto e = audit_text("o2", "", cfg, idx);
    EXPECT_EQ(e.total(), 0u);
    EXPECT_TRUE(e.verdicts.empty());
}

TEST(AuthorYear, ExtractAndResolve) {
    auto refs = extract_author_year("As shown by Wolfe et al., 2016 and Gilhus NE, Neurology 2016, steroids help.");
    ASSERT_EQ(refs.size(), 2u);
    EXPECT_EQ(refs[0].surname, "Wolfe");
    EXPECT_EQ(refs[0].year, 2016);
    EXPECT_EQ(refs[1].surname, "Gilhus");
    FixtureIndex idx;
    EXPECT_EQ(resolve_author_year(refs[0], idx, {"myasthenia"}), RefClass::not_found);
}

TEST(AuditReport, ZeroVariant) {
    CitationAudit a;
    EXPECT_EQ(render_audit_report(a),
              "## Citation Audit Report\n"
              "This output contains **0 PubMed identifiers (PMIDs)**. No specific citations\n"
              "can be verified against PubMed. All clinical claims rely on unverifiable\n"
              "parametric knowledge.\n");
}

TEST(AuditReport, Lines) {
    auto cfg = mg();
    FixtureIndex idx;
    fill(idx);
    idx.put({"31114444", true, std::string(90, 'm') + " myasthenia", "J", {}});
    auto a = audit_text("o", "[PMID:29395989, GOLD] x [PMID:40000001] y [PMID:31114444]", cfg, idx);
    auto r = render_audit_report(a);
    EXPECT_NE(r.find("This output cites **3 unique PMIDs**."), std::string::npos);
    EXPECT_NE(r.find("- **2** (67%) exist in PubMed and are clinically relevant\n"), std::string::npos);
    EXPECT_NE(r.find("- **1** (33%) were not found in PubMed\n"), std::string::npos);
    EXPECT_NE(r.find("  PMID:29395989 [RELEVANT] -- \"Myasthenia gravis: diagnosis and management\" (Neurology)\n"),
              std::string::npos);
    EXPECT_NE(r.find("  PMID:40000001 [NOT FOUND]\n"), std::string::npos);
    EXPECT_NE(r.find(std::string(80, 'm') + "...\""), std::string::npos);
    EXPECT_EQ(r, render_audit_report(audit_text("o", "[PMID:29395989, GOLD] x [PMID:40000001] y [PMID:31114444]", cfg, idx)));
}

TEST(AuditReport, ListsTenThenSummarises) {
    auto cfg = mg();
    FixtureIndex idx;
    std::string text;
    for (int i = 0; i < 12; ++i) {
        auto p = std::to_string(50000000 + i);
        idx.put({p, true, "Myasthenia case " + std::to_string(i), "J", {}});
        text += " [PMID:" + p + "]";
    }
    auto r = render_audit_report(audit_text("o", text, cfg, idx));
    size_t lines = 0;
    for (size_t at = 0; (at = r.find("  PMID:", at)) != std::string::npos; ++at) ++lines;
    EXPECT_EQ(lines, 10u);
    EXPECT_NE(r.find("  ... and 2 more PMIDs verified\n"), std::string::npos);
}
