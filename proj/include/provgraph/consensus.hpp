#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extraction.hpp"
#include "log.hpp"
#include "normalize.hpp"
#include "temporal.hpp"
#include "util.hpp"

namespace provgraph {

enum class Tier { GOLD, SILVER, BRONZE };

inline const char *tier_name(Tier t) {
    switch (t) {
    case Tier::GOLD: return "GOLD";
    case Tier::SILVER: return "SILVER";
    case Tier::BRONZE: return "BRONZE";
    }
    return "?";
}

inline std::optional<Tier> parse_tier(std::string_view s) {
    if (s == "GOLD") return Tier::GOLD;
    if (s == "SILVER") return Tier::SILVER;
    if (s == "BRONZE") return Tier::BRONZE;
    return std::nullopt;
}

inline double tier_score(Tier t) {
    switch (t) {
    case Tier::GOLD: return 0.95;
    case Tier::SILVER: return 0.85;
    case Tier::BRONZE: return 0.70;
    }
    return 0;
}

inline const char *map_tier_to_grade(Tier t) {
    switch (t) {
    case Tier::GOLD: return "High";
    case Tier::SILVER: return "Moderate";
    case Tier::BRONZE: return "Low";
    }
    return "?";
}

struct Edge {
    std::string edge_id;
    NormalizedEntity subject;
    std::string predicate;
    NormalizedEntity object;
    Tier tier = Tier::BRONZE;
    double consensus_score = 0.70;
    std::vector<std::string> source_models;  // sorted, unique
    std::vector<std::string> pmid_list;      // sorted, unique
    std::string evidence_sample;
    bool is_temporal = false;
    std::optional<TemporalAnchor> anchor;
    bool cross_tier_confirmed = false;
    std::vector<std::string> disease_context;  // sorted, unique
    bool is_protected = false;

    size_t evidence_breadth() const { return pmid_list.size(); }
    bool resolved_anchor() const { return anchor && anchor->resolved(); }
    std::string temporal_display() const { return resolved_anchor() ? anchor->display() : ""; }
    std::optional<int> time_index_months() const {
        if (!resolved_anchor()) return std::nullopt;
        return time_index(*anchor);
    }
    std::string parse_status() const {
        if (!is_temporal) return "";
        return resolved_anchor() ? "resolved" : "unresolved";
    }
    void set_tier(Tier t) {
        tier = t;
        consensus_score = tier_score(t);
    }
};

inline std::string entity_key(const NormalizedEntity &e) { return e.cui ? lower(*e.cui) : fold(e.surface); }

inline std::string edge_key_string(const NormalizedEntity &s, const std::string &predicate, const NormalizedEntity &o) {
    return entity_key(s) + "|" + collapse_ws(predicate) + "|" + entity_key(o);
}

inline std::string edge_key(const NormalizedEntity &s, const std::string &predicate, const NormalizedEntity &o) {
    return md5_hex(edge_key_string(s, predicate, o));
}

inline std::string edge_key(const Triplet &t) { return edge_key(t.subject, t.predicate, t.object); }

namespace detail {

inline bool member_before(const Triplet &a, const Triplet &b) {
    if (a.pmid != b.pmid) return a.pmid < b.pmid;
    if (a.source_model != b.source_model) return a.source_model < b.source_model;
    return a.evidence_quote < b.evidence_quote;
}

}  // namespace detail

struct MergeLog {
    std::vector<std::string> messages;
};

// members must share a key; is_temporal comes from the caller's predicate set
inline Edge merge_group(std::vector<Triplet> group, bool temporal_predicate, MergeLog *log_out = nullptr) {
    if (group.empty()) throw Error("merge_group: empty group");
    std::sort(group.begin(), group.end(), detail::member_before);
    const auto key = edge_key(group.front());
    for (auto &t : group)
        if (edge_key(t) != key) throw Error("merge_group: members do not share a key");

    Edge e;
    e.edge_id = key;
    e.subject = group.front().subject;
    e.predicate = group.front().predicate;
    e.object = group.front().object;
    for (auto &t : group) {
        e.source_models.push_back(t.source_model);
        e.pmid_list.push_back(t.pmid);
        for (auto &d : t.disease_context) e.disease_context.push_back(d);
    }
    sort_unique(e.source_models);
    sort_unique(e.pmid_list);
    sort_unique(e.disease_context);

    // highest confidence; group is already in (pmid, model) order so the first max wins ties
    const Triplet *best = &group.front();
    for (auto &t : group)
        if (t.confidence.value_or(0.0) > best->confidence.value_or(0.0)) best = &t;
    e.evidence_sample = best->evidence_quote;

    e.is_temporal = temporal_predicate;
    if (temporal_predicate) {
        // the anchor backed by the most PMIDs; ties go to the earliest member
        std::map<std::pair<int, int>, std::set<std::string>> support;
        std::map<std::pair<int, int>, const Triplet *> first;
        for (auto &t : group) {
            if (!t.anchor || !t.anchor->resolved()) continue;
            auto k = std::make_pair(t.anchor->start_months, t.anchor->end_months);
            support[k].insert(t.pmid);
            if (!first.count(k)) first[k] = &t;
        }
        const Triplet *pick = nullptr;
        size_t best_n = 0;
        for (auto &t : group) {
            if (!t.anchor || !t.anchor->resolved()) continue;
            auto k = std::make_pair(t.anchor->start_months, t.anchor->end_months);
            if (first[k] != &t) continue;
            if (support[k].size() > best_n) {
                best_n = support[k].size();
                pick = &t;
            }
        }
        if (pick) {
            e.anchor = pick->anchor;
            if (support.size() > 1 && log_out)
                log_out->messages.push_back("edge " + key + ": kept anchor " + pick->anchor->display() + ", discarded " +
                                            std::to_string(support.size() - 1) + " conflicting anchor(s)");
        } else {
            e.anchor = TemporalAnchor{};
        }
    }
    return e;
}

inline Edge assign_tier(Edge e, const std::set<std::string> &tier1_keys) {
    if (tier1_keys.count(e.edge_id)) {
        e.set_tier(Tier::GOLD);
        e.cross_tier_confirmed = true;
    } else if (e.source_models.size() >= 2 || e.pmid_list.size() >= 2) {
        e.set_tier(Tier::SILVER);
    } else {
        e.set_tier(Tier::BRONZE);
    }
    return e;
}

struct ConflictTable {
    std::vector<std::pair<std::string, std::string>> antonyms = {{"TREATED_WITH", "LACKS_FEATURE"}};
    bool temporal_disjoint = true;

    bool antonym(const std::string &a, const std::string &b) const {
        for (auto &[x, y] : antonyms)
            if ((a == x && b == y) || (a == y && b == x)) return true;
        return false;
    }
};

inline bool conflicts(const Edge &t2, const Edge &t1, const ConflictTable &tbl) {
    if (entity_key(t2.subject) != entity_key(t1.subject) || entity_key(t2.object) != entity_key(t1.object)) return false;
    if (tbl.antonym(t2.predicate, t1.predicate)) return true;
    if (tbl.temporal_disjoint && t2.predicate == t1.predicate && t2.resolved_anchor() && t1.resolved_anchor()) {
        auto &a = *t2.anchor;
        auto &b = *t1.anchor;
        return a.end_months < b.start_months || b.end_months < a.start_months;
    }
    return false;
}

struct Discard {
    std::string edge_id;
    std::string tier1_edge_id;
    std::string reason;
};

struct Integrated {
    std::vector<Edge> edges;
    std::vector<Discard> discarded;
    size_t absorbed = 0;
};

inline Integrated integrate_tiers(std::vector<Edge> tier1, const std::vector<Edge> &tier2,
                                  const ConflictTable &tbl = {}) {
    for (auto &e : tier1)
        if (!e.is_protected) throw Error("integrate_tiers: tier-1 edge " + e.edge_id + " is not protected");
    Integrated out;
    std::map<std::string, size_t> by_key;
    for (size_t i = 0; i < tier1.size(); ++i) by_key[tier1[i].edge_id] = i;

    std::vector<Edge> kept;
    for (auto &e : tier2) {
        if (auto it = by_key.find(e.edge_id); it != by_key.end()) {
            auto &g = tier1[it->second];
            g.pmid_list.insert(g.pmid_list.end(), e.pmid_list.begin(), e.pmid_list.end());
            g.source_models.insert(g.source_models.end(), e.source_models.begin(), e.source_models.end());
            g.disease_context.insert(g.disease_context.end(), e.disease_context.begin(), e.disease_context.end());
            sort_unique(g.pmid_list);
            sort_unique(g.source_models);
            sort_unique(g.disease_context);
            if (g.evidence_sample.empty()) g.evidence_sample = e.evidence_sample;
            g.cross_tier_confirmed = true;
            ++out.absorbed;
            continue;
        }
        const Edge *hit = nullptr;
        for (auto &g : tier1)
            if (conflicts(e, g, tbl)) {
                hit = &g;
                break;
            }
        if (hit) {
            out.discarded.push_back({e.edge_id, hit->edge_id, e.predicate + " conflicts with " + hit->predicate});
            log(LogLevel::Info, "discard tier-2 edge " + e.edge_id + " (conflicts with tier-1 " + hit->edge_id + ")");
            continue;
        }
        kept.push_back(e);
    }
    out.edges = std::move(tier1);
    out.edges.insert(out.edges.end(), kept.begin(), kept.end());
    return out;
}

// ---- serialization: one record per edge, fixed field order ----

inline json to_json(const Edge &e) {
    json j;
    j["subject"] = e.subject.surface;
    j["subject_type"] = std::string(label_name(e.subject.type));
    j["subject_cui"] = e.subject.cui ? json(*e.subject.cui) : json(nullptr);
    j["predicate"] = e.predicate;
    j["object"] = e.object.surface;
    j["object_type"] = std::string(label_name(e.object.type));
    j["object_cui"] = e.object.cui ? json(*e.object.cui) : json(nullptr);
    j["quality_tier"] = tier_name(e.tier);
    j["consensus_score"] = e.consensus_score;
    j["source_models"] = e.source_models;
    j["pmid_list"] = e.pmid_list;
    j["evidence_sample"] = e.evidence_sample;
    j["edge_id"] = e.edge_id;
    j["is_temporal"] = e.is_temporal;
    j["temporal_value_display"] = e.temporal_display();
    auto ti = e.time_index_months();
    j["time_index_months"] = ti ? json(*ti) : json(nullptr);
    j["temporal_midpoint_years"] = ti ? json(*ti / 12.0) : json(nullptr);
    j["temporal_parse_status"] = e.parse_status();
    j["cross_tier_confirmed"] = e.cross_tier_confirmed;
    j["evidence_breadth"] = e.evidence_breadth();
    j["disease_context"] = e.disease_context;
    j["is_protected"] = e.is_protected;
    if (e.resolved_anchor()) {
        j["temporal_start"] = e.anchor->start();
        j["temporal_end"] = e.anchor->end();
        j["temporal_precision"] = precision_name(e.anchor->precision);
    }
    return j;
}

inline NormalizedEntity entity_from_json(const json &j, const std::string &prefix) {
    NormalizedEntity n;
    n.surface = j.at(prefix).get<std::string>();
    auto lbl = parse_label(j.value(prefix + "_type", "Entity"));
    n.type = lbl.value_or(NodeLabel::Entity);
    if (j.contains(prefix + "_cui") && j[prefix + "_cui"].is_string()) {
        n.cui = j[prefix + "_cui"].get<std::string>();
        n.resolver = ResolverKind::Dictionary;
    }
    return n;
}

inline Precision parse_precision(const std::string &s) {
    if (s == "Range") return Precision::Range;
    if (s == "Fuzzy") return Precision::Fuzzy;
    if (s == "Stage") return Precision::Stage;
    return Precision::Exact;
}

inline Edge edge_from_json(const json &j) {
    Edge e;
    e.subject = entity_from_json(j, "subject");
    e.object = entity_from_json(j, "object");
    e.predicate = j.at("predicate").get<std::string>();
    auto t = parse_tier(j.value("quality_tier", "BRONZE"));
    if (!t) throw ParseError("edge: unknown quality_tier", j.dump());
    e.tier = *t;
    e.consensus_score = j.value("consensus_score", tier_score(*t));
    auto strs = [&](const char *k) {
        std::vector<std::string> v;
        if (!j.contains(k) || j[k].is_null()) return v;
        for (auto &x : j[k]) v.push_back(x.is_string() ? x.get<std::string>() : x.dump());
        return v;
    };
    e.source_models = strs("source_models");
    e.pmid_list = strs("pmid_list");
    e.disease_context = strs("disease_context");
    sort_unique(e.source_models);
    sort_unique(e.pmid_list);
    sort_unique(e.disease_context);
    e.evidence_sample = j.value("evidence_sample", "");
    e.edge_id = j.contains("edge_id") && j["edge_id"].is_string() ? j["edge_id"].get<std::string>()
                                                                    : edge_key(e.subject, e.predicate, e.object);
    e.is_temporal = j.value("is_temporal", false);
    e.cross_tier_confirmed = j.value("cross_tier_confirmed", false);
    e.is_protected = j.value("is_protected", false);
    if (e.is_temporal) {
        e.anchor = TemporalAnchor{};
        if (j.value("temporal_parse_status", "") == "resolved") {
            std::optional<int> s, en;
            if (j.contains("temporal_start")) s = parse_iso_duration(j["temporal_start"].get<std::string>());
            if (j.contains("temporal_end")) en = parse_iso_duration(j["temporal_end"].get<std::string>());
            if (!s && j.contains("temporal_value_display")) {
                auto d = j["temporal_value_display"].get<std::string>();
                auto dash = d.find("-P");
                s = parse_iso_duration(d.substr(0, dash));
                en = dash == std::string::npos ? s : parse_iso_duration(d.substr(dash + 1));
            }
            if (s && en) {
                auto p = parse_precision(j.value("temporal_precision", *s == *en ? "Exact" : "Range"));
                e.anchor = make_anchor(*s, *en, p);
            } else if (j.contains("time_index_months") && j["time_index_months"].is_number_integer()) {
                int ti = j["time_index_months"].get<int>();
                e.anchor = make_anchor(ti, ti, Precision::Exact);
            }
        }
    }
    return e;
}

// Tier-1 backbone records: same shape as edge records; protection and GOLD forced
inline std::vector<Edge> load_tier1(const std::string &path, const ResolverChain *chain = nullptr) {
    std::vector<Edge> out;
    for (auto &j : read_jsonl(path)) {
        auto e = edge_from_json(j);
        if (chain) {
            auto s = normalize_entity(e.subject.surface, *chain, std::string(label_name(e.subject.type)));
            auto o = normalize_entity(e.object.surface, *chain, std::string(label_name(e.object.type)));
            if (!e.subject.cui) e.subject.cui = s.cui;
            if (!e.object.cui) e.object.cui = o.cui;
        }
        e.edge_id = edge_key(e.subject, e.predicate, e.object);
        if (e.is_temporal && j.contains("temporal_phrase")) e.anchor = resolve_temporal(j["temporal_phrase"].get<std::string>());
        e.is_protected = true;
        e.set_tier(Tier::GOLD);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace provgraph
