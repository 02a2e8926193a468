#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "consensus.hpp"
#include "pairconfig.hpp"
#include "predicates.hpp"
#include "util.hpp"

namespace provgraph {

struct Node {
    std::string key;
    std::string name;
    std::optional<std::string> cui;
    std::set<NodeLabel> labels;
};

inline int tier_rank(const Edge &e) { return static_cast<int>(e.tier); }

class Graph {
public:
    Graph() = default;
    explicit Graph(std::vector<Edge> edges) {
        for (auto &e : edges) add(std::move(e));
    }

    // a repeated edge_id merges provenance into the existing edge
    void add(Edge e) {
        touch(e.subject);
        touch(e.object);
        if (auto it = by_id_.find(e.edge_id); it != by_id_.end()) {
            auto &g = edges_[it->second];
            for (auto &d : e.disease_context)
                if (!has_ctx(g, d)) by_disease_[lower(d)].push_back(it->second);
            g.pmid_list.insert(g.pmid_list.end(), e.pmid_list.begin(), e.pmid_list.end());
            g.source_models.insert(g.source_models.end(), e.source_models.begin(), e.source_models.end());
            g.disease_context.insert(g.disease_context.end(), e.disease_context.begin(), e.disease_context.end());
            sort_unique(g.pmid_list);
            sort_unique(g.source_models);
            sort_unique(g.disease_context);
            return;
        }
        by_id_[e.edge_id] = edges_.size();
        for (auto &d : e.disease_context) by_disease_[lower(d)].push_back(edges_.size());
        by_predicate_[e.predicate].push_back(edges_.size());
        if (e.is_temporal) temporal_.push_back(edges_.size());
        edges_.push_back(std::move(e));
    }

    const std::vector<Edge> &edges() const { return edges_; }
    const std::map<std::string, Node> &nodes() const { return nodes_; }
    const Edge *edge(const std::string &id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &edges_[it->second];
    }
    const Node &node_of(const NormalizedEntity &e) const { return nodes_.at(entity_key(e)); }

    std::vector<size_t> in_context(const std::string &disease) const {
        auto it = by_disease_.find(lower(disease));
        return it == by_disease_.end() ? std::vector<size_t>{} : it->second;
    }
    const std::vector<size_t> &temporal_ids() const { return temporal_; }

    std::set<std::string> all_pmids() const {
        std::set<std::string> s;
        for (auto &e : edges_) s.insert(e.pmid_list.begin(), e.pmid_list.end());
        return s;
    }

private:
    static bool has_ctx(const Edge &e, const std::string &d) {
        for (auto &c : e.disease_context)
            if (lower(c) == lower(d)) return true;
        return false;
    }

    void touch(const NormalizedEntity &e) {
        auto k = entity_key(e);
        auto &n = nodes_[k];
        if (n.key.empty()) {
            n.key = k;
            n.name = e.surface;
            n.cui = e.cui;
        }
        n.labels.insert(e.type);
    }

    std::vector<Edge> edges_;
    std::map<std::string, Node> nodes_;
    std::map<std::string, size_t> by_id_;
    std::map<std::string, std::vector<size_t>> by_disease_;
    std::map<std::string, std::vector<size_t>> by_predicate_;
    std::vector<size_t> temporal_;
};

inline bool has_context(const Edge &e, const std::string &d) {
    for (auto &c : e.disease_context)
        if (lower(c) == lower(d)) return true;
    return false;
}

inline void tier_sort(std::vector<Edge> &v) {
    std::sort(v.begin(), v.end(), [](const Edge &a, const Edge &b) {
        if (tier_rank(a) != tier_rank(b)) return tier_rank(a) < tier_rank(b);
        return a.edge_id < b.edge_id;
    });
}

inline const DiseaseSpec &require_disease(const DiseasePairConfig &cfg, const std::string &d) {
    auto *s = cfg.disease(d);
    if (!s) throw Error("unknown disease '" + d + "' for pair " + cfg.pair_id);
    return *s;
}

namespace strategy {

inline std::vector<Edge> context_filter(const Graph &g, const std::string &d) {
    std::vector<Edge> out;
    for (auto i : g.in_context(d))
        if (is_differential(g.edges()[i].predicate)) out.push_back(g.edges()[i]);
    return out;
}

inline bool is_anchor(const Graph &g, const Edge &e, const DiseaseSpec &spec) {
    const auto &n = g.node_of(e.subject);
    if (!n.labels.count(NodeLabel::Disease)) return false;
    if (n.cui)
        for (auto &c : spec.cuis)
            if (lower(*n.cui) == lower(c)) return true;
    auto nm = lower(n.name);
    return nm == lower(spec.full_name) || nm == lower(spec.short_name);
}

inline std::vector<Edge> anchor_node(const Graph &g, const DiseaseSpec &spec) {
    std::vector<Edge> out;
    for (auto &e : g.edges())
        if (is_differential(e.predicate) && is_anchor(g, e, spec)) out.push_back(e);
    return out;
}

inline std::vector<Edge> lacks_feature(const Graph &g, const std::string &d) {
    std::vector<Edge> out;
    for (auto i : g.in_context(d))
        if (g.edges()[i].predicate == "LACKS_FEATURE") out.push_back(g.edges()[i]);
    return out;
}

}  // namespace strategy

inline std::vector<Edge> dedup_by_id(std::vector<Edge> v) {
    std::vector<Edge> out;
    std::set<std::string> seen;
    for (auto &e : v)
        if (seen.insert(e.edge_id).second) out.push_back(std::move(e));
    return out;
}

inline std::vector<Edge> query_comparative(const Graph &g, const std::string &disease, const DiseasePairConfig &cfg) {
    const auto &spec = require_disease(cfg, disease);
    auto all = strategy::context_filter(g, spec.short_name);
    auto b = strategy::anchor_node(g, spec);
    auto c = strategy::lacks_feature(g, spec.short_name);
    all.insert(all.end(), b.begin(), b.end());
    all.insert(all.end(), c.begin(), c.end());
    auto out = dedup_by_id(std::move(all));
    tier_sort(out);
    return out;
}

inline std::vector<Edge> query_temporal(const Graph &g, const std::string &disease, const DiseasePairConfig &cfg) {
    const auto &spec = require_disease(cfg, disease);
    std::vector<Edge> out;
    for (auto i : g.in_context(spec.short_name)) {
        auto &e = g.edges()[i];
        if (e.is_temporal && e.resolved_anchor()) out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const Edge &a, const Edge &b) {
        auto ta = *a.time_index_months(), tb = *b.time_index_months();
        return ta != tb ? ta < tb : a.edge_id < b.edge_id;
    });
    return out;
}

inline std::vector<Edge> query_treatment(const Graph &g, const std::string &disease, const DiseasePairConfig &cfg) {
    const auto &spec = require_disease(cfg, disease);
    std::vector<Edge> out;
    for (auto i : g.in_context(spec.short_name))
        if (is_treatment(g.edges()[i].predicate)) out.push_back(g.edges()[i]);
    tier_sort(out);
    return out;
}

inline constexpr size_t kNeighbourhoodLimit = 30;

inline bool looks_like_cui(const std::string &s) {
    static const std::regex re("^[Cc]\\d{7}$");
    return std::regex_match(s, re);
}

// CUI matches first, then name-substring matches; each block in edge_id order
inline std::vector<Edge> query_neighbourhood(const Graph &g, const std::string &entity,
                                             std::optional<std::string> cui = std::nullopt,
                                             std::optional<std::string> disease = std::nullopt,
                                             size_t limit = kNeighbourhoodLimit) {
    if (!cui && looks_like_cui(entity)) cui = entity;
    const auto needle = lower(entity);
    std::vector<Edge> by_cui, by_name;
    for (auto &e : g.edges()) {
        if (disease && !has_context(e, *disease)) continue;
        bool cm = false, nm = false;
        for (auto *ent : {&e.subject, &e.object}) {
            const auto &n = g.node_of(*ent);
            if (cui && n.cui && lower(*n.cui) == lower(*cui)) cm = true;
            if (!needle.empty() && contains(lower(n.name), needle)) nm = true;
        }
        if (cm)
            by_cui.push_back(e);
        else if (nm)
            by_name.push_back(e);
    }
    auto by_id = [](const Edge &a, const Edge &b) { return a.edge_id < b.edge_id; };
    std::sort(by_cui.begin(), by_cui.end(), by_id);
    std::sort(by_name.begin(), by_name.end(), by_id);
    by_cui.insert(by_cui.end(), by_name.begin(), by_name.end());
    if (by_cui.size() > limit) by_cui.resize(limit);
    return by_cui;
}

struct GraphStats {
    size_t nodes = 0, edges = 0, anchors = 0, gold = 0, silver = 0, bronze = 0, pmids = 0;
};

inline GraphStats graph_stats(const Graph &g) {
    GraphStats s;
    s.nodes = g.nodes().size();
    s.edges = g.edges().size();
    for (auto &e : g.edges()) {
        if (e.is_temporal && e.resolved_anchor()) ++s.anchors;
        if (e.tier == Tier::GOLD) ++s.gold;
        if (e.tier == Tier::SILVER) ++s.silver;
        if (e.tier == Tier::BRONZE) ++s.bronze;
    }
    s.pmids = g.all_pmids().size();
    return s;
}

inline Graph load_graph(const std::vector<std::string> &paths) {
    Graph g;
    for (auto &p : paths)
        for (auto &j : read_jsonl(p)) g.add(edge_from_json(j));
    return g;
}

namespace cypher {

inline std::string str(const std::string &s) {
    std::string out = "'";
    for (char c : s) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\'': out += "\\'"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + "'";
}

inline std::string list(const std::vector<std::string> &v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + str(v[i]);
    return out + "]";
}

inline std::string boolean(bool b) { return b ? "true" : "false"; }

}  // namespace cypher

inline std::string export_import_script(const Graph &g) {
    using namespace cypher;
    std::string out;
    out += "// knowledge graph import script\n";
    out += "// nodes: " + std::to_string(g.nodes().size()) + "\n";
    out += "// edges: " + std::to_string(g.edges().size()) + "\n";
    out += "CREATE CONSTRAINT entity_key IF NOT EXISTS FOR (n:Entity) REQUIRE n.key IS UNIQUE;\n";

    for (auto &[key, n] : g.nodes()) {
        std::string labels = ":Entity";
        for (auto l : n.labels)
            if (l != NodeLabel::Entity) labels += ":" + std::string(label_name(l));
        out += "CREATE (" + labels + " {key: " + str(key) + ", name: " + str(n.name);
        if (n.cui) out += ", cui: " + str(*n.cui);
        out += "});\n";
    }

    std::vector<const Edge *> es;
    for (auto &e : g.edges()) es.push_back(&e);
    std::sort(es.begin(), es.end(), [](auto *a, auto *b) { return a->edge_id < b->edge_id; });
    static const std::regex rel_ok("^[A-Z][A-Z0-9_]*$");
    for (auto *e : es) {
        auto rel = std::regex_match(e->predicate, rel_ok) ? e->predicate : "`" + e->predicate + "`";
        out += "MATCH (s:Entity {key: " + str(entity_key(e->subject)) + "}), (t:Entity {key: " +
               str(entity_key(e->object)) + "}) CREATE (s)-[:" + rel + " {";
        out += "quality_tier: " + str(tier_name(e->tier));
        out += ", consensus_score: " + fixed(e->consensus_score, 2);
        out += ", source_models: " + list(e->source_models);
        out += ", pmid_list: " + list(e->pmid_list);
        out += ", evidence_sample: " + str(e->evidence_sample);
        out += ", edge_id: " + str(e->edge_id);
        out += ", is_temporal: " + boolean(e->is_temporal);
        if (e->is_temporal) {
            out += ", temporal_value_display: " + str(e->temporal_display());
            if (auto ti = e->time_index_months()) {
                out += ", time_index_months: " + std::to_string(*ti);
                out += ", temporal_midpoint_years: " + fixed(*ti / 12.0, 4);
            }
            out += ", temporal_parse_status: " + str(e->parse_status());
        }
        out += ", cross_tier_confirmed: " + boolean(e->cross_tier_confirmed);
        out += ", evidence_breadth: " + std::to_string(e->evidence_breadth());
        out += ", disease_context: " + list(e->disease_context);
        out += ", is_protected: " + boolean(e->is_protected);
        out += "}]->(t);\n";
    }
    return out;
}

}  // namespace provgraph
