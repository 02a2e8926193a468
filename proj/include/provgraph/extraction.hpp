#pragma once

#include <json.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "log.hpp"
#include "pairconfig.hpp"
#include "predicates.hpp"
#include "util.hpp"

namespace provgraph {

using json = nlohmann::ordered_json;

struct Abstract {
    std::string pmid;
    std::string title;
    std::string text;
    std::vector<std::string> mesh_terms;
    int year = 0;
};

inline bool valid_pmid(const std::string &s) {
    static const std::regex re("^\\d{6,9}$");
    return std::regex_match(s, re);
}

inline Abstract abstract_from_json(const json &j) {
    Abstract a;
    a.pmid = j.at("pmid").is_string() ? j.at("pmid").get<std::string>() : std::to_string(j.at("pmid").get<long>());
    a.title = j.value("title", "");
    a.text = j.value("text", "");
    if (j.contains("mesh_terms")) a.mesh_terms = j["mesh_terms"].get<std::vector<std::string>>();
    a.year = j.value("year", 0);
    if (!valid_pmid(a.pmid)) throw Error("abstract: pmid must be 6-9 digits, got '" + a.pmid + "'");
    if (trim(a.text).empty()) throw Error("abstract " + a.pmid + ": empty text");
    return a;
}

// one JSON object per line
inline std::vector<json> read_jsonl(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<json> out;
    std::string line;
    size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception &e) {
            throw ParseError(path + ":" + std::to_string(n) + ": " + e.what(), line);
        }
    }
    return out;
}

inline std::vector<Abstract> load_corpus(const std::string &path) {
    std::vector<Abstract> out;
    for (auto &j : read_jsonl(path)) out.push_back(abstract_from_json(j));
    return out;
}

struct EntityRef {
    std::string surface;
    std::string type = "Entity";
    bool operator==(const EntityRef &) const = default;
};

struct RawTriplet {
    EntityRef subject;
    std::string predicate;
    EntityRef object;
    std::string evidence_quote;
    std::string source_model;
    std::string pmid;
    std::optional<std::string> temporal_phrase;
    std::optional<double> confidence;
    bool out_of_schema = false;
};

inline json to_json(const RawTriplet &t) {
    json j;
    j["subject"] = t.subject.surface;
    j["subject_type"] = t.subject.type;
    j["predicate"] = t.predicate;
    j["object"] = t.object.surface;
    j["object_type"] = t.object.type;
    j["evidence_quote"] = t.evidence_quote;
    if (t.temporal_phrase) j["temporal_phrase"] = *t.temporal_phrase;
    if (t.confidence) j["confidence"] = *t.confidence;
    return j;
}

inline RawTriplet triplet_from_json(const json &j) {
    RawTriplet t;
    t.subject = {j.at("subject").get<std::string>(), j.value("subject_type", "Entity")};
    t.predicate = j.at("predicate").get<std::string>();
    t.object = {j.at("object").get<std::string>(), j.value("object_type", "Entity")};
    t.evidence_quote = j.value("evidence_quote", "");
    if (j.contains("temporal_phrase") && !j["temporal_phrase"].is_null())
        t.temporal_phrase = j["temporal_phrase"].get<std::string>();
    if (j.contains("confidence") && j["confidence"].is_number()) t.confidence = j["confidence"].get<double>();
    return t;
}

struct ScreenReply {
    bool extract = false;
    double confidence = 0;
};

struct GenParams {
    double temperature = 0.0;
    int max_tokens = 8000;
    bool json_mode = false;
};

// Contract every model backend satisfies. complete() serves synthesis,
// judging and NLI; screen/extract serve Phase I.
class ModelProvider {
public:
    virtual ~ModelProvider() = default;
    virtual std::string id() const = 0;
    // host the provider talks to; "" for in-process providers
    virtual std::string endpoint_host() const { return ""; }
    virtual ScreenReply screen(const Abstract &a, const DiseasePairConfig &cfg) = 0;
    virtual std::vector<RawTriplet> extract(const Abstract &a, const DiseasePairConfig &cfg) = 0;
    virtual std::string complete(const std::string &system, const std::string &user, const GenParams &p) = 0;
};

// Replays recorded responses. Records: {"provider","call","key","response"}
// with call in {screen, extract, complete}; complete is keyed by md5(system \x1e user).
class FixtureProvider : public ModelProvider {
public:
    FixtureProvider(std::string id, std::map<std::string, json> records) : id_(std::move(id)), rec_(std::move(records)) {}

    static std::unique_ptr<FixtureProvider> from_file(const std::string &id, const std::string &path) {
        std::map<std::string, json> recs;
        for (auto &j : read_jsonl(path)) {
            if (j.value("provider", id) != id) continue;
            recs[j.at("call").get<std::string>() + "/" + j.at("key").get<std::string>()] = j.at("response");
        }
        return std::make_unique<FixtureProvider>(id, std::move(recs));
    }

    static std::string prompt_key(const std::string &system, const std::string &user) {
        return md5_hex(system + "\x1e" + user);
    }

    std::string id() const override { return id_; }

    ScreenReply screen(const Abstract &a, const DiseasePairConfig &) override {
        auto &r = get("screen", a.pmid);
        return {r.at("extract").get<bool>(), r.at("confidence").get<double>()};
    }

    std::vector<RawTriplet> extract(const Abstract &a, const DiseasePairConfig &) override {
        std::vector<RawTriplet> out;
        for (auto &j : get("extract", a.pmid)) out.push_back(triplet_from_json(j));
        return out;
    }

    std::string complete(const std::string &system, const std::string &user, const GenParams &) override {
        return get("complete", prompt_key(system, user)).get<std::string>();
    }

private:
    const json &get(const std::string &call, const std::string &key) const {
        auto it = rec_.find(call + "/" + key);
        if (it == rec_.end()) throw TransportError("fixture provider " + id_ + ": no recorded " + call + " for " + key);
        return it->second;
    }

    std::string id_;
    std::map<std::string, json> rec_;
};

// Wraps a live provider and appends every response to a fixture file.
class RecordingProvider : public ModelProvider {
public:
    RecordingProvider(ModelProvider &inner, std::string path) : inner_(inner), path_(std::move(path)) {}
    std::string id() const override { return inner_.id(); }
    std::string endpoint_host() const override { return inner_.endpoint_host(); }

    ScreenReply screen(const Abstract &a, const DiseasePairConfig &cfg) override {
        auto r = inner_.screen(a, cfg);
        write("screen", a.pmid, json{{"extract", r.extract}, {"confidence", r.confidence}});
        return r;
    }
    std::vector<RawTriplet> extract(const Abstract &a, const DiseasePairConfig &cfg) override {
        auto ts = inner_.extract(a, cfg);
        json arr = json::array();
        for (auto &t : ts) arr.push_back(to_json(t));
        write("extract", a.pmid, arr);
        return ts;
    }
    std::string complete(const std::string &system, const std::string &user, const GenParams &p) override {
        auto s = inner_.complete(system, user, p);
        write("complete", FixtureProvider::prompt_key(system, user), s);
        return s;
    }

private:
    void write(const std::string &call, const std::string &key, const json &resp) {
        std::lock_guard<std::mutex> lk(mu_);
        std::ofstream out(path_, std::ios::app);
        out << json{{"provider", id()}, {"call", call}, {"key", key}, {"response", resp}}.dump() << "\n";
    }
    ModelProvider &inner_;
    std::string path_;
    std::mutex mu_;
};

inline constexpr double kScreenThreshold = 0.85;

struct ScreeningDecision {
    std::string pmid;
    std::string provider;
    bool extract = false;
    double confidence = 0;
    bool pass = false;
};

inline ScreeningDecision screen_relevance(const Abstract &a, const DiseasePairConfig &cfg, ModelProvider &p) {
    auto r = p.screen(a, cfg);  // TransportError propagates; it is not a reject
    ScreeningDecision d{a.pmid, p.id(), r.extract, r.confidence, r.extract && r.confidence >= kScreenThreshold};
    log(LogLevel::Debug, "screen " + a.pmid + " via " + p.id() + " confidence=" + fixed(r.confidence, 3) +
                             (d.pass ? " pass" : " reject"));
    return d;
}

namespace detail {

inline std::string strip_edge_punct(const std::string &t) {
    size_t b = 0, e = t.size();
    auto punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    while (b < e && punct(static_cast<unsigned char>(t[b]))) ++b;
    while (e > b && punct(static_cast<unsigned char>(t[e - 1]))) --e;
    return t.substr(b, e - b);
}

inline std::vector<std::string> quote_tokens(const std::string &s) {
    std::vector<std::string> out;
    for (auto &t : split_ws(lower(s))) {
        auto x = strip_edge_punct(t);
        if (!x.empty()) out.push_back(x);
    }
    return out;
}

}  // namespace detail

// some 3 consecutive quote tokens occur consecutively in the abstract
inline bool validate_evidence_quote(const std::string &quote, const std::string &abstract_text) {
    auto q = detail::quote_tokens(quote);
    if (q.size() < 3) return false;
    auto a = detail::quote_tokens(abstract_text);
    std::set<std::string> grams;
    for (size_t i = 0; i + 2 < a.size(); ++i) grams.insert(a[i] + "\x1f" + a[i + 1] + "\x1f" + a[i + 2]);
    for (size_t i = 0; i + 2 < q.size(); ++i)
        if (grams.count(q[i] + "\x1f" + q[i + 1] + "\x1f" + q[i + 2])) return true;
    return false;
}

inline bool validate_evidence_quote(const RawTriplet &t, const Abstract &a) {
    return t.pmid == a.pmid && validate_evidence_quote(t.evidence_quote, a.text);
}

struct ExtractionStats {
    size_t returned = 0;
    size_t dropped_quote = 0;
    size_t flagged_predicate = 0;
    size_t provider_failures = 0;
};

inline std::vector<RawTriplet> extract_triplets(const Abstract &a, const DiseasePairConfig &cfg,
                                                const std::vector<ModelProvider *> &providers,
                                                ExtractionStats *stats = nullptr) {
    if (providers.empty()) throw Error("extract_triplets: no providers");
    ExtractionStats local;
    auto &st = stats ? *stats : local;
    std::vector<RawTriplet> out;
    size_t failed = 0;
    std::string last_err;
    for (auto *p : providers) {
        std::vector<RawTriplet> ts;
        try {
            ts = p->extract(a, cfg);
        } catch (const TransportError &e) {
            ++failed;
            ++st.provider_failures;
            last_err = e.what();
            log(LogLevel::Warn, "extract " + a.pmid + ": provider " + p->id() + " failed: " + e.what());
            continue;
        }
        for (auto &t : ts) {
            ++st.returned;
            t.source_model = p->id();
            t.pmid = a.pmid;
            if (!validate_evidence_quote(t, a)) {
                ++st.dropped_quote;
                continue;
            }
            t.out_of_schema = !is_known_predicate(t.predicate);
            if (t.out_of_schema) ++st.flagged_predicate;
            out.push_back(std::move(t));
        }
    }
    if (failed == providers.size()) throw TransportError("extract " + a.pmid + ": all providers failed: " + last_err);
    return out;
}

}  // namespace provgraph
