#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "citeverify.hpp"
#include "synthesis.hpp"
#include "temporal.hpp"
#include "util.hpp"

namespace provgraph {

inline double reliability_coefficient(Arm a) {
    switch (a) {
    case Arm::heg_tkg: return 0.97;
    case Arm::vanilla: return 0.80;
    case Arm::guideline_rag: return 0.50;
    }
    return 0;
}

inline double feature_coverage(const std::string &text, const std::vector<std::string> &features) {
    if (features.empty()) throw Error("feature_coverage: empty feature list");
    auto t = lower(text);
    size_t hit = 0;
    for (auto &f : features)
        if (contains(t, lower(f))) ++hit;
    return double(hit) / double(features.size());
}

// Claims: sentences split on '.' or ';' after dropping headers, table rules
// and list markers; a claim needs at least 4 whitespace tokens.
inline std::vector<std::string> segment_claims(const std::string &text) {
    static const std::regex table_rule("^\\s*\\|?[\\s:|\\-]+\\|?\\s*$");
    static const std::regex bullet("^\\s*(?:[-*+]|\\d+[.)])\\s+");
    std::string clean;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t[0] == '#') {
            clean += ".\n";
            continue;
        }
        if (t.find('|') != std::string::npos && std::regex_match(t, table_rule)) continue;
        t = std::regex_replace(t, bullet, "");
        // a table row is a segment of its own
        bool row = t.find('|') != std::string::npos;
        std::replace(t.begin(), t.end(), '|', ' ');
        std::string s;
        for (size_t i = 0; i < t.size(); ++i) {
            if ((t[i] == '*' || t[i] == '_') && i + 1 < t.size() && t[i + 1] == t[i]) {
                ++i;
                continue;
            }
            s += t[i];
        }
        clean += s + (row ? ".\n" : "\n");
    }
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (split_ws(cur).size() >= 4) out.push_back(collapse_ws(cur));
        cur.clear();
    };
    for (char c : clean) {
        if (c == '.' || c == ';') {
            flush();
            continue;
        }
        cur += c == '\n' ? ' ' : c;
    }
    flush();
    return out;
}

inline double evidence_traceability(const std::string &text) {
    auto claims = segment_claims(text);
    if (claims.empty()) return 0.0;
    size_t cited = 0;
    for (auto &c : claims)
        if (contains(c, "[PMID:")) ++cited;
    return double(cited) / double(claims.size());
}

inline double provenance_gap(double fc, double ets, double r) {
    for (double v : {fc, ets, r})
        if (!(v >= 0.0 && v <= 1.0)) throw Error("provenance_gap: inputs must lie in [0, 1]");
    return std::max(fc - ets * r, 0.0);
}

inline size_t word_count(const std::string &text) { return split_ws(text).size(); }

inline double citation_density(const std::string &text) {
    auto w = word_count(text);
    if (w == 0) throw Error("citation_density: empty text");
    return double(extract_pmids(text).size()) / double(w) * 1000.0;
}

// ratio of means over a set of outputs (mean unique PMIDs / mean words x 1000)
inline double aggregate_citation_density(const std::vector<std::string> &texts) {
    double p = 0, w = 0;
    for (auto &t : texts) {
        p += double(extract_pmids(t).size());
        w += double(word_count(t));
    }
    if (w == 0) throw Error("citation_density: empty corpus");
    return p / w * 1000.0;
}

inline size_t temporal_claims(const std::string &text) { return extract_temporal_claims(text).count; }

struct ProvenanceMetrics {
    double fc = 0, ets = 0, r = 0, pg = 0, density = 0;
    size_t temporal_claims = 0;
};

inline ProvenanceMetrics compute_metrics(const std::string &text, const std::vector<std::string> &features, Arm arm) {
    ProvenanceMetrics m;
    m.fc = feature_coverage(text, features);
    m.ets = evidence_traceability(text);
    m.r = reliability_coefficient(arm);
    m.pg = provenance_gap(m.fc, m.ets, m.r);
    m.density = word_count(text) ? citation_density(text) : 0.0;
    m.temporal_claims = temporal_claims(text);
    return m;
}

// Per-scenario reference table: FC / ETS / PG for vanilla, guideline_rag, heg_tkg.
struct ArmTriple {
    double fc = 0, ets = 0, pg = 0;
};

struct ScenarioMetricsRow {
    std::string scenario_id;
    std::string type;
    ArmTriple vanilla, rag, heg;
    const ArmTriple &arm(Arm a) const { return a == Arm::vanilla ? vanilla : a == Arm::guideline_rag ? rag : heg; }
    ArmTriple &arm(Arm a) { return a == Arm::vanilla ? vanilla : a == Arm::guideline_rag ? rag : heg; }
};

inline std::vector<ScenarioMetricsRow> load_scenario_metrics(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<ScenarioMetricsRow> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(trim(c));
        if (f.size() != 11) throw ParseError(path + ": expected 11 columns", line);
        auto d = [&](int i) { return std::stod(f[i]); };
        out.push_back({f[0], f[1], {d(2), d(3), d(4)}, {d(5), d(6), d(7)}, {d(8), d(9), d(10)}});
    }
    return out;
}

inline std::string metrics_table_header() {
    return "scenario_id,type,vanilla_fc,vanilla_ets,vanilla_pg,rag_fc,rag_ets,rag_pg,heg_fc,heg_ets,heg_pg\n";
}

inline std::string metrics_table_row(const ScenarioMetricsRow &r) {
    auto t = [](const ArmTriple &a) { return fixed(a.fc, 2) + "," + fixed(a.ets, 2) + "," + fixed(a.pg, 2); };
    return r.scenario_id + "," + r.type + "," + t(r.vanilla) + "," + t(r.rag) + "," + t(r.heg) + "\n";
}

}  // namespace provgraph
