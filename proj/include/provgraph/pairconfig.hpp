#pragma once

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "duration.hpp"
#include "predicates.hpp"
#include "util.hpp"

namespace provgraph {

struct DiseaseSpec {
    std::string short_name;
    std::string full_name;
    std::vector<std::string> cuis;
    std::vector<std::string> text_patterns;
    std::string ontology_id;
    std::string mondo_id;
    bool operator==(const DiseaseSpec &) const = default;
};

struct MonthRange {
    int start = 0, end = 0;
    bool operator==(const MonthRange &) const = default;
};

struct Synonym {
    std::string cui;
    std::string type;
    bool operator==(const Synonym &) const = default;
};

struct DiseasePairConfig {
    std::string pair_id;
    std::string label;
    std::vector<DiseaseSpec> diseases;
    std::vector<std::string> shared_cuis;
    std::vector<std::string> shared_patterns;
    std::string parent_name, parent_cui;
    int min_year = 0, max_year = 0, max_abstracts_per_query = 0;
    std::vector<std::string> mesh_terms;
    std::vector<std::string> temporal_predicates;
    std::vector<std::string> relevance_keywords;
    std::map<std::string, MonthRange> fuzzy_table;
    std::map<std::string, MonthRange> stage_table;
    std::map<std::string, Synonym> synonyms;  // folded surface -> entry
    std::string extraction_yaml;              // opaque prompt context block

    bool operator==(const DiseasePairConfig &) const = default;

    const DiseaseSpec *disease(std::string_view short_name) const {
        for (auto &d : diseases)
            if (lower(d.short_name) == lower(short_name)) return &d;
        return nullptr;
    }
    std::vector<std::string> short_names() const {
        std::vector<std::string> v;
        for (auto &d : diseases) v.push_back(d.short_name);
        return v;
    }
};

// relevance keywords used when a pair file leaves them out
inline std::vector<std::string> default_relevance_keywords(const std::string &pair_id) {
    if (pair_id == "mg_lems")
        return {"myasthenia", "lambert-eaton", "lems", "neuromuscular junction", "acetylcholine receptor", "achr",
                "musk", "thymoma", "thymectomy", "pyridostigmine", "complement", "eculizumab", "efgartigimod"};
    if (pair_id == "dmd_bmd")
        return {"duchenne", "becker", "muscular dystrophy", "dystrophin", "dmd", "bmd", "dystrophinopathy",
                "exon skipping", "corticosteroid", "cardiomyopathy", "ambulation"};
    if (pair_id == "cidp_gbs")
        return {"cidp", "guillain-barr\xc3\xa9", "guillain-barre", "gbs", "demyelinating", "polyneuropathy", "ivig",
                "plasmapheresis", "nerve conduction", "areflexia", "albumin-cytologic"};
    return {};
}

inline std::map<std::string, MonthRange> default_fuzzy_table() {
    auto y = [](int a, int b) { return MonthRange{a * 12, b * 12}; };
    return {
        {"neonatal", {0, 1}},          {"newborn", {0, 1}},           {"infancy", {0, 12}},
        {"toddler", y(1, 3)},          {"preschool", y(3, 5)},        {"school age", y(6, 12)},
        {"first decade", y(0, 10)},    {"early teens", y(13, 15)},    {"mid teens", y(15, 17)},
        {"late teens", y(17, 19)},     {"teenage", y(13, 19)},        {"adolescence", y(10, 19)},
        {"young adulthood", y(18, 35)}, {"early twenties", y(20, 23)}, {"mid twenties", y(24, 26)},
        {"late twenties", y(27, 29)},  {"twenties", y(20, 29)},       {"early thirties", y(30, 33)},
        {"thirties", y(30, 39)},       {"forties", y(40, 49)},        {"middle age", y(40, 65)},
        {"fifties", y(50, 59)},        {"sixties", y(60, 69)},        {"elderly", y(65, 90)},
    };
}

inline std::map<std::string, MonthRange> default_stage_table() {
    auto y = [](int a, int b) { return MonthRange{a * 12, b * 12}; };
    return {
        {"early childhood", y(1, 5)},
        {"late childhood", y(6, 12)},
        {"childhood", y(1, 12)},
        {"early ambulatory", y(2, 7)},
        {"late ambulatory", y(7, 12)},
        {"early non-ambulatory", y(10, 15)},
        {"late non-ambulatory", y(15, 30)},
        {"adulthood", y(18, 65)},
    };
}

namespace detail {

inline std::vector<std::string> str_list(const YAML::Node &n, const std::string &path) {
    std::vector<std::string> out;
    if (!n) return out;
    if (!n.IsSequence()) throw ConfigError(path, "expected a list");
    for (size_t i = 0; i < n.size(); ++i) {
        if (!n[i].IsScalar()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back(n[i].as<std::string>());
    }
    return out;
}

inline std::string str(const YAML::Node &n, const std::string &path, bool required) {
    if (!n) {
        if (required) throw ConfigError(path, "required field missing");
        return {};
    }
    if (!n.IsScalar()) throw ConfigError(path, "expected a string");
    return n.as<std::string>();
}

inline int integer(const YAML::Node &n, const std::string &path) {
    if (!n) return 0;
    try {
        return n.as<int>();
    } catch (const YAML::Exception &) {
        throw ConfigError(path, "expected an integer");
    }
}

inline bool is_cui(const std::string &s) {
    static const std::regex re("^C\\d{7}$");
    return std::regex_match(s, re);
}

inline std::map<std::string, MonthRange> range_table(const YAML::Node &n, const std::string &path) {
    std::map<std::string, MonthRange> out;
    if (!n.IsMap()) throw ConfigError(path, "expected a mapping phrase -> [start, end]");
    for (auto it = n.begin(); it != n.end(); ++it) {
        auto key = it->first.as<std::string>();
        auto p = path + "." + key;
        auto v = it->second;
        if (!v.IsSequence() || v.size() != 2) throw ConfigError(p, "expected [start, end]");
        auto a = parse_iso_duration(v[0].as<std::string>()), b = parse_iso_duration(v[1].as<std::string>());
        if (!a || !b) throw ConfigError(p, "not an ISO-8601 duration");
        if (*b < *a) throw ConfigError(p, "end before start");
        out[lower(key)] = {*a, *b};
    }
    return out;
}

}  // namespace detail

inline DiseasePairConfig load_config(const std::string &text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception &e) {
        throw ConfigError("", std::string("parse failure: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("", "parse failure: top level must be a mapping");

    DiseasePairConfig c;
    c.pair_id = detail::str(root["disease_pair"], "disease_pair", true);
    if (trim(c.pair_id).empty()) throw ConfigError("disease_pair", "must be non-empty");
    c.label = detail::str(root["label"], "label", false);

    auto cls = root["classification"];
    if (!cls) throw ConfigError("classification", "required field missing");
    auto ds = cls["diseases"];
    if (!ds) throw ConfigError("classification.diseases", "required field missing");
    if (!ds.IsSequence() || ds.size() == 0) throw ConfigError("classification.diseases", "empty disease list");
    for (size_t i = 0; i < ds.size(); ++i) {
        auto p = "classification.diseases[" + std::to_string(i) + "]";
        DiseaseSpec d;
        d.short_name = detail::str(ds[i]["short_name"], p + ".short_name", true);
        d.full_name = detail::str(ds[i]["full_name"], p + ".full_name", false);
        d.cuis = detail::str_list(ds[i]["cuis"], p + ".cuis");
        d.text_patterns = detail::str_list(ds[i]["text_patterns"], p + ".text_patterns");
        d.ontology_id = detail::str(ds[i]["ontology_id"], p + ".ontology_id", false);
        d.mondo_id = detail::str(ds[i]["mondo_id"], p + ".mondo_id", false);
        if (d.cuis.empty()) throw ConfigError(p + ".cuis", "at least one CUI required");
        for (auto &cui : d.cuis)
            if (!detail::is_cui(cui)) throw ConfigError(p + ".cuis", "malformed CUI '" + cui + "'");
        if (d.text_patterns.empty()) throw ConfigError(p + ".text_patterns", "at least one pattern required");
        c.diseases.push_back(std::move(d));
    }
    if (auto sh = cls["shared"]) {
        c.shared_cuis = detail::str_list(sh["cuis"], "classification.shared.cuis");
        c.shared_patterns = detail::str_list(sh["text_patterns"], "classification.shared.text_patterns");
        if (auto par = sh["parent"]) {
            c.parent_name = detail::str(par["name"], "classification.shared.parent.name", false);
            c.parent_cui = detail::str(par["cui"], "classification.shared.parent.cui", false);
        }
    }

    if (auto pm = root["pubmed"]) {
        c.min_year = detail::integer(pm["min_year"], "pubmed.min_year");
        c.max_year = detail::integer(pm["max_year"], "pubmed.max_year");
        c.max_abstracts_per_query = detail::integer(pm["max_abstracts_per_query"], "pubmed.max_abstracts_per_query");
        c.mesh_terms = detail::str_list(pm["mesh_terms"], "pubmed.mesh_terms");
    }

    c.temporal_predicates = detail::str_list(root["temporal_predicates"], "temporal_predicates");
    for (size_t i = 0; i < c.temporal_predicates.size(); ++i)
        if (!is_known_predicate(c.temporal_predicates[i]))
            throw ConfigError("temporal_predicates[" + std::to_string(i) + "]",
                              "unknown predicate '" + c.temporal_predicates[i] + "'");

    c.relevance_keywords = detail::str_list(root["relevance_keywords"], "relevance_keywords");
    if (c.relevance_keywords.empty()) c.relevance_keywords = default_relevance_keywords(c.pair_id);
    if (c.relevance_keywords.empty())
        throw ConfigError("relevance_keywords", "must be non-empty (no built-in list for this pair)");

    c.fuzzy_table = default_fuzzy_table();
    c.stage_table = default_stage_table();
    if (auto tt = root["temporal_tables"]) {
        if (tt["fuzzy"]) c.fuzzy_table = detail::range_table(tt["fuzzy"], "temporal_tables.fuzzy");
        if (tt["stage"]) c.stage_table = detail::range_table(tt["stage"], "temporal_tables.stage");
    }

    if (auto syn = root["synonyms"]) {
        if (!syn.IsSequence()) throw ConfigError("synonyms", "expected a list");
        for (size_t i = 0; i < syn.size(); ++i) {
            auto p = "synonyms[" + std::to_string(i) + "]";
            auto surface = detail::str(syn[i]["surface"], p + ".surface", true);
            Synonym s{detail::str(syn[i]["cui"], p + ".cui", true), detail::str(syn[i]["type"], p + ".type", false)};
            if (!detail::is_cui(s.cui)) throw ConfigError(p + ".cui", "malformed CUI '" + s.cui + "'");
            if (s.type.empty()) s.type = "Entity";
            if (!parse_label(s.type)) throw ConfigError(p + ".type", "unknown node label '" + s.type + "'");
            c.synonyms[fold(surface)] = s;
        }
    }

    if (auto ex = root["extraction"]) c.extraction_yaml = YAML::Dump(ex);
    return c;
}

inline DiseasePairConfig load_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

inline std::string serialize_config(const DiseasePairConfig &c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "disease_pair" << YAML::Value << c.pair_id;
    out << YAML::Key << "label" << YAML::Value << YAML::DoubleQuoted << c.label;
    out << YAML::Key << "classification" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "diseases" << YAML::Value << YAML::BeginSeq;
    for (auto &d : c.diseases) {
        out << YAML::BeginMap;
        out << YAML::Key << "short_name" << YAML::Value << d.short_name;
        out << YAML::Key << "full_name" << YAML::Value << d.full_name;
        out << YAML::Key << "cuis" << YAML::Value << d.cuis;
        out << YAML::Key << "text_patterns" << YAML::Value << d.text_patterns;
        out << YAML::Key << "ontology_id" << YAML::Value << d.ontology_id;
        out << YAML::Key << "mondo_id" << YAML::Value << d.mondo_id;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "shared" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cuis" << YAML::Value << c.shared_cuis;
    out << YAML::Key << "text_patterns" << YAML::Value << c.shared_patterns;
    out << YAML::Key << "parent" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.parent_name;
    out << YAML::Key << "cui" << YAML::Value << c.parent_cui;
    out << YAML::EndMap << YAML::EndMap << YAML::EndMap;

    out << YAML::Key << "pubmed" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "min_year" << YAML::Value << c.min_year;
    out << YAML::Key << "max_year" << YAML::Value << c.max_year;
    out << YAML::Key << "max_abstracts_per_query" << YAML::Value << c.max_abstracts_per_query;
    out << YAML::Key << "mesh_terms" << YAML::Value << c.mesh_terms;
    out << YAML::EndMap;

    out << YAML::Key << "temporal_predicates" << YAML::Value << c.temporal_predicates;
    out << YAML::Key << "relevance_keywords" << YAML::Value << c.relevance_keywords;

    auto table = [&](const std::map<std::string, MonthRange> &t) {
        out << YAML::BeginMap;
        for (auto &[k, r] : t) {
            out << YAML::Key << k << YAML::Value << YAML::Flow << YAML::BeginSeq << iso_months(r.start)
                << iso_months(r.end) << YAML::EndSeq;
        }
        out << YAML::EndMap;
    };
    out << YAML::Key << "temporal_tables" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "fuzzy" << YAML::Value;
    table(c.fuzzy_table);
    out << YAML::Key << "stage" << YAML::Value;
    table(c.stage_table);
    out << YAML::EndMap;

    out << YAML::Key << "synonyms" << YAML::Value << YAML::BeginSeq;
    for (auto &[surface, s] : c.synonyms) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "surface" << YAML::Value << surface;
        out << YAML::Key << "cui" << YAML::Value << s.cui;
        out << YAML::Key << "type" << YAML::Value << s.type;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    if (!c.extraction_yaml.empty()) out << YAML::Key << "extraction" << YAML::Value << YAML::Load(c.extraction_yaml);
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

// every disease whose pattern or CUI occurs; a shared-only hit yields all diseases
inline std::vector<std::string> classify_disease_context(const std::string &text, const DiseasePairConfig &cfg) {
    const auto t = lower(text);
    std::vector<std::string> out;
    for (auto &d : cfg.diseases) {
        bool hit = false;
        for (auto &p : d.text_patterns) hit = hit || contains(t, lower(p));
        for (auto &c : d.cuis) hit = hit || contains(t, lower(c));
        if (hit) out.push_back(d.short_name);
    }
    if (!out.empty()) return out;
    bool shared = false;
    for (auto &p : cfg.shared_patterns) shared = shared || contains(t, lower(p));
    for (auto &c : cfg.shared_cuis) shared = shared || contains(t, lower(c));
    if (!cfg.parent_cui.empty()) shared = shared || contains(t, lower(cfg.parent_cui));
    if (shared) return cfg.short_names();
    return out;
}

}  // namespace provgraph
