#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "extraction.hpp"
#include "pairconfig.hpp"
#include "util.hpp"

namespace provgraph {

inline std::vector<std::string> extract_pmids(const std::string &text) {
    static const std::regex re("PMID[:\\s]*(\\d{6,9})(?!\\d)", std::regex::icase);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it)
        if (seen.insert((*it)[1].str()).second) out.push_back((*it)[1].str());
    return out;
}

struct PubMedRecord {
    std::string pmid;
    bool exists = false;
    std::string title;
    std::string journal;
    std::vector<std::string> mesh_terms;
};

inline json to_json(const PubMedRecord &r) {
    return json{{"title", r.title}, {"journal", r.journal}, {"mesh_terms", r.mesh_terms}};
}

class PubMedClient {
public:
    virtual ~PubMedClient() = default;
    virtual PubMedRecord fetch_summary(const std::string &pmid) = 0;
    // PMIDs returned by an author + year search; nullopt when the search cannot be answered
    virtual std::optional<std::vector<std::string>> search_author_year(const std::string &, int) { return std::nullopt; }
};

// Local key -> record store. File layout:
// {"records": {"<pmid>": {"title","journal","mesh_terms"}}, "author_year": {"<surname>|<year>": [pmids]}}
class FixtureIndex : public PubMedClient {
public:
    FixtureIndex() = default;

    explicit FixtureIndex(const std::string &path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open PubMed index " + path);
        auto &f = *this;
        json j = json::parse(in);
        const json recs = j.value("records", json::object()), ay = j.value("author_year", json::object());
        for (auto &[k, v] : recs.items()) {
            PubMedRecord r{k, true, v.value("title", ""), v.value("journal", "")};
            if (v.contains("mesh_terms")) r.mesh_terms = v["mesh_terms"].get<std::vector<std::string>>();
            f.records_[k] = r;
        }
        for (auto &[k, v] : ay.items())
            f.author_year_[k] = v.get<std::vector<std::string>>();
    }

    void put(const PubMedRecord &r) {
        std::lock_guard<std::mutex> lk(mu_);
        if (r.exists) records_[r.pmid] = r;
    }

    void save(const std::string &path) const {
        std::lock_guard<std::mutex> lk(mu_);
        json recs = json::object(), ay = json::object();
        for (auto &[k, r] : records_) recs[k] = to_json(r);
        for (auto &[k, v] : author_year_) ay[k] = v;
        std::ofstream out(path);
        out << json{{"records", recs}, {"author_year", ay}}.dump(1) << "\n";
    }

    bool has(const std::string &pmid) const {
        std::lock_guard<std::mutex> lk(mu_);
        return records_.count(pmid) > 0;
    }
    size_t size() const { return records_.size(); }

    PubMedRecord fetch_summary(const std::string &pmid) override {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = records_.find(pmid);
        if (it == records_.end()) return PubMedRecord{pmid, false, "", "", {}};
        return it->second;
    }

    std::optional<std::vector<std::string>> search_author_year(const std::string &surname, int year) override {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = author_year_.find(lower(surname) + "|" + std::to_string(year));
        if (it == author_year_.end()) return std::vector<std::string>{};
        return it->second;
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, PubMedRecord> records_;
    std::map<std::string, std::vector<std::string>> author_year_;
};

// ---- rate limiting ----

class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0;  // seconds
    virtual void sleep_until(double t) = 0;
};

class SteadyClock : public Clock {
public:
    double now() override {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    }
    void sleep_until(double t) override {
        auto d = t - now();
        if (d > 0) std::this_thread::sleep_for(std::chrono::duration<double>(d));
    }
};

class MockClock : public Clock {
public:
    double now() override { return t_; }
    void sleep_until(double t) override {
        if (t > t_) t_ = t;
    }
    void advance(double dt) { t_ += dt; }

private:
    double t_ = 0;
};

inline constexpr double kEutilsSpacing = 0.35;

// serialises callers; consecutive acquisitions are at least `spacing` seconds apart
class RateLimiter {
public:
    explicit RateLimiter(Clock &clock, double spacing = kEutilsSpacing) : clock_(clock), spacing_(spacing) {}

    double acquire() {
        std::lock_guard<std::mutex> lk(mu_);
        double t = clock_.now();
        if (started_ && t < next_) {
            clock_.sleep_until(next_);
            t = clock_.now();
        }
        started_ = true;
        next_ = t + spacing_;
        return t;
    }

private:
    Clock &clock_;
    double spacing_;
    std::mutex mu_;
    bool started_ = false;
    double next_ = 0;
};

// Anything that can perform one esummary request and hand back the XML body.
using EsummaryFetch = std::function<std::string(const std::string &pmid)>;

inline std::string esummary_url(const std::string &pmid) {
    return "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esummary.fcgi?db=pubmed&id=" + pmid + "&retmode=xml";
}

// esummary v1 payload: eSummaryResult/DocSum/Item[@Name]
inline PubMedRecord parse_esummary_xml(const std::string &pmid, const std::string &xml) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(xml);
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error &e) {
        throw ParseError("esummary " + pmid + ": " + e.what(), xml);
    }
    auto root = tree.get_child_optional("eSummaryResult");
    if (!root) throw ParseError("esummary " + pmid + ": missing eSummaryResult", xml);
    PubMedRecord r{pmid, false, "", "", {}};
    for (auto &[tag, doc] : *root) {
        if (tag != "DocSum") continue;
        bool errored = false;
        for (auto &[t, item] : doc) {
            if (t != "Item") continue;
            auto name = item.get<std::string>("<xmlattr>.Name", "");
            auto val = item.get_value<std::string>();
            if (name == "Title") r.title = val;
            else if (name == "FullJournalName" && !val.empty()) r.journal = val;
            else if (name == "Source" && r.journal.empty()) r.journal = val;
            else if (lower(name) == "error") errored = true;
        }
        r.exists = !errored && !r.title.empty();
    }
    return r;
}

// Rate-limited client over a fetch function; every response lands in the cache index.
class LiveClient : public PubMedClient {
public:
    LiveClient(EsummaryFetch fetch, Clock &clock, FixtureIndex *cache = nullptr, std::string cache_path = "")
        : fetch_(std::move(fetch)), limiter_(clock), cache_(cache), cache_path_(std::move(cache_path)) {}

    PubMedRecord fetch_summary(const std::string &pmid) override {
        if (cache_ && cache_->has(pmid)) return cache_->fetch_summary(pmid);
        limiter_.acquire();
        auto body = fetch_(pmid);
        auto r = parse_esummary_xml(pmid, body);
        if (cache_) {
            cache_->put(r);
            if (!cache_path_.empty()) cache_->save(cache_path_);
        }
        return r;
    }

    RateLimiter &limiter() { return limiter_; }

private:
    EsummaryFetch fetch_;
    RateLimiter limiter_;
    FixtureIndex *cache_;
    std::string cache_path_;
};

// ---- relevance ----

enum class Verdict { Relevant, WrongField, NotFound };

inline const char *verdict_tag(Verdict v) {
    switch (v) {
    case Verdict::Relevant: return "RELEVANT";
    case Verdict::WrongField: return "WRONG FIELD";
    case Verdict::NotFound: return "NOT FOUND";
    }
    return "?";
}

inline Verdict classify_relevance(const PubMedRecord &r, const std::vector<std::string> &keywords, bool title_only = false) {
    if (!r.exists) return Verdict::NotFound;
    for (auto &k : keywords) {
        if (icontains(r.title, k)) return Verdict::Relevant;
        if (!title_only)
            for (auto &m : r.mesh_terms)
                if (icontains(m, k)) return Verdict::Relevant;
    }
    return Verdict::WrongField;
}

inline Verdict classify_relevance(const PubMedRecord &r, const DiseasePairConfig &cfg, bool title_only = false) {
    return classify_relevance(r, cfg.relevance_keywords, title_only);
}

// ---- author-year references ----

enum class RefClass { specific, ambiguous, wrong, not_found, too_vague };

inline const char *ref_class_name(RefClass c) {
    switch (c) {
    case RefClass::specific: return "specific";
    case RefClass::ambiguous: return "ambiguous";
    case RefClass::wrong: return "wrong";
    case RefClass::not_found: return "not_found";
    case RefClass::too_vague: return "too_vague";
    }
    return "?";
}

struct AuthorYearRef {
    std::string text;
    std::string surname;
    int year = 0;
    RefClass resolution = RefClass::too_vague;
};

// "Wolfe et al., 2016" and "Gilhus NE, Neurology 2016"
inline std::vector<AuthorYearRef> extract_author_year(const std::string &text) {
    static const std::regex et_al("\\b([A-Z][A-Za-z'\\-]+) et al\\.?,? \\(?((?:19|20)\\d{2})\\)?");
    static const std::regex initials("\\b([A-Z][a-z'\\-]+) [A-Z]{1,3}, ([A-Z][A-Za-z .&]+?),? ((?:19|20)\\d{2})\\b");
    std::vector<std::pair<size_t, AuthorYearRef>> found;
    std::set<std::string> seen;
    for (auto *re : {&et_al, &initials}) {
        for (std::sregex_iterator it(text.begin(), text.end(), *re), end; it != end; ++it) {
            auto &m = *it;
            AuthorYearRef r;
            r.text = m[0].str();
            r.surname = m[1].str();
            r.year = std::stoi(m[m.size() - 1].str());
            if (seen.insert(r.text).second) found.push_back({size_t(m.position(0)), r});
        }
    }
    std::sort(found.begin(), found.end(), [](auto &a, auto &b) { return a.first < b.first; });
    std::vector<AuthorYearRef> out;
    for (auto &f : found) out.push_back(f.second);
    return out;
}

inline RefClass resolve_author_year(const AuthorYearRef &r, PubMedClient &client, const std::vector<std::string> &keywords) {
    static const std::set<std::string> generic = {"The", "A", "An", "In", "See", "Group", "Society", "Consortium", "Committee"};
    if (r.surname.size() < 2 || generic.count(r.surname) || r.year == 0) return RefClass::too_vague;
    auto hits = client.search_author_year(r.surname, r.year);
    if (!hits) return RefClass::too_vague;
    if (hits->empty()) return RefClass::not_found;
    if (hits->size() > 1) return RefClass::ambiguous;
    auto rec = client.fetch_summary(hits->front());
    return classify_relevance(rec, keywords) == Verdict::Relevant ? RefClass::specific : RefClass::wrong;
}

// ---- audit ----

struct PmidVerdict {
    std::string pmid;
    Verdict verdict = Verdict::NotFound;
    std::string title;
    std::string journal;
};

struct CitationAudit {
    std::string output_id;
    std::vector<std::string> pmids;
    std::vector<PmidVerdict> verdicts;
    size_t relevant = 0, wrong_field = 0, not_found = 0;
    std::vector<AuthorYearRef> author_year_refs;

    size_t total() const { return pmids.size(); }
    double pct(size_t n) const { return pmids.empty() ? 0.0 : 100.0 * double(n) / double(pmids.size()); }
};

inline CitationAudit audit_text(const std::string &output_id, const std::string &text, const DiseasePairConfig &cfg,
                                PubMedClient &client, bool title_only = false) {
    CitationAudit a;
    a.output_id = output_id;
    a.pmids = extract_pmids(text);
    for (auto &p : a.pmids) {
        auto rec = client.fetch_summary(p);
        auto v = classify_relevance(rec, cfg, title_only);
        a.verdicts.push_back({p, v, rec.title, rec.journal});
        (v == Verdict::Relevant ? a.relevant : v == Verdict::WrongField ? a.wrong_field : a.not_found)++;
    }
    for (auto r : extract_author_year(text)) {
        r.resolution = resolve_author_year(r, client, cfg.relevance_keywords);
        a.author_year_refs.push_back(r);
    }
    return a;
}

inline constexpr size_t kAuditListedPmids = 10;

inline std::string render_audit_report(const CitationAudit &a, size_t listed = kAuditListedPmids) {
    std::string out = "## Citation Audit Report\n";
    if (a.pmids.empty()) {
        out += "This output contains **0 PubMed identifiers (PMIDs)**. No specific citations\n"
               "can be verified against PubMed. All clinical claims rely on unverifiable\n"
               "parametric knowledge.\n";
        return out;
    }
    auto pct = [&](size_t n) { return fixed(a.pct(n), 0) + "%"; };
    out += "This output cites **" + std::to_string(a.total()) +
           " unique PMIDs**. We verified each against the PubMed database:\n";
    out += "- **" + std::to_string(a.relevant) + "** (" + pct(a.relevant) + ") exist in PubMed and are clinically relevant\n";
    out += "- **" + std::to_string(a.wrong_field) + "** (" + pct(a.wrong_field) + ") exist but are from an unrelated field\n";
    out += "- **" + std::to_string(a.not_found) + "** (" + pct(a.not_found) + ") were not found in PubMed\n";
    out += "\n";
    for (size_t i = 0; i < std::min(listed, a.verdicts.size()); ++i) {
        auto &v = a.verdicts[i];
        out += "  PMID:" + v.pmid + " [" + verdict_tag(v.verdict) + "]";
        if (v.verdict != Verdict::NotFound) {
            auto title = v.title.size() > 80 ? v.title.substr(0, 80) + "..." : v.title;
            out += " -- \"" + title + "\" (" + v.journal + ")";
        }
        out += "\n";
    }
    if (a.verdicts.size() > listed)
        out += "  ... and " + std::to_string(a.verdicts.size() - listed) + " more PMIDs verified\n";
    return out;
}

}  // namespace provgraph
