#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "extraction.hpp"
#include "pairconfig.hpp"
#include "predicates.hpp"
#include "temporal.hpp"
#include "util.hpp"

namespace provgraph {

enum class ResolverKind { Dictionary, EmbeddingLinker, FallbackLinker, Fuzzy, None };

inline const char *resolver_name(ResolverKind k) {
    switch (k) {
    case ResolverKind::Dictionary: return "Dictionary";
    case ResolverKind::EmbeddingLinker: return "EmbeddingLinker";
    case ResolverKind::FallbackLinker: return "FallbackLinker";
    case ResolverKind::Fuzzy: return "Fuzzy";
    case ResolverKind::None: return "None";
    }
    return "?";
}

struct NormalizedEntity {
    std::string surface;
    std::optional<std::string> cui;
    NodeLabel type = NodeLabel::Entity;
    ResolverKind resolver = ResolverKind::None;
    bool operator==(const NormalizedEntity &) const = default;
};

struct ResolverHit {
    std::string cui;
    std::optional<NodeLabel> type;
};

class Resolver {
public:
    virtual ~Resolver() = default;
    virtual ResolverKind kind() const = 0;
    virtual std::optional<ResolverHit> resolve(const std::string &surface) const = 0;
};

// exact lookup on the case-folded, whitespace-collapsed surface
class DictionaryResolver : public Resolver {
public:
    explicit DictionaryResolver(std::map<std::string, Synonym> table) : table_(std::move(table)) {}
    static DictionaryResolver from_config(const DiseasePairConfig &cfg) {
        auto t = cfg.synonyms;
        // disease names and patterns resolve to the primary CUI
        for (auto &d : cfg.diseases) {
            Synonym s{d.cuis.front(), "Disease"};
            t.emplace(fold(d.full_name), s);
            t.emplace(fold(d.short_name), s);
        }
        if (!cfg.parent_cui.empty()) t.emplace(fold(cfg.parent_name), Synonym{cfg.parent_cui, "Disease"});
        return DictionaryResolver(std::move(t));
    }
    ResolverKind kind() const override { return ResolverKind::Dictionary; }
    std::optional<ResolverHit> resolve(const std::string &surface) const override {
        auto it = table_.find(fold(surface));
        if (it == table_.end()) return std::nullopt;
        return ResolverHit{it->second.cui, parse_label(it->second.type)};
    }
    const std::map<std::string, Synonym> &table() const { return table_; }

private:
    std::map<std::string, Synonym> table_;
};

// Slot for a neural or rule-based linker (none bundled). Wrap any callable.
class LinkerAdapter : public Resolver {
public:
    using Fn = std::function<std::optional<ResolverHit>(const std::string &)>;
    LinkerAdapter(ResolverKind k, Fn fn) : kind_(k), fn_(std::move(fn)) {}
    ResolverKind kind() const override { return kind_; }
    std::optional<ResolverHit> resolve(const std::string &s) const override { return fn_(s); }

private:
    ResolverKind kind_;
    Fn fn_;
};

inline std::set<std::string> token_set(const std::string &s) {
    std::set<std::string> out;
    std::string cur;
    for (char ch : lower(s)) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += ch;
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

inline double jaccard(const std::set<std::string> &a, const std::set<std::string> &b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t inter = 0;
    for (auto &x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// token-set Jaccard against dictionary keys; best score wins, ties by key
class FuzzyResolver : public Resolver {
public:
    explicit FuzzyResolver(std::map<std::string, Synonym> table, double threshold = 0.8)
        : table_(std::move(table)), threshold_(threshold) {
        for (auto &[k, _] : table_) keys_.emplace_back(k, token_set(k));
    }
    ResolverKind kind() const override { return ResolverKind::Fuzzy; }
    std::optional<ResolverHit> resolve(const std::string &surface) const override {
        auto ts = token_set(surface);
        double best = -1;
        const std::string *best_key = nullptr;
        for (auto &[k, toks] : keys_) {
            double j = jaccard(ts, toks);
            if (j > best) {
                best = j;
                best_key = &k;
            }
        }
        if (!best_key || best < threshold_) return std::nullopt;
        auto &s = table_.at(*best_key);
        return ResolverHit{s.cui, parse_label(s.type)};
    }

private:
    std::map<std::string, Synonym> table_;
    std::vector<std::pair<std::string, std::set<std::string>>> keys_;
    double threshold_;
};

// Dictionary -> EmbeddingLinker -> FallbackLinker -> Fuzzy
class ResolverChain {
public:
    void add(std::shared_ptr<Resolver> r) {
        chain_.push_back(std::move(r));
        std::stable_sort(chain_.begin(), chain_.end(),
                         [](auto &a, auto &b) { return static_cast<int>(a->kind()) < static_cast<int>(b->kind()); });
    }
    static ResolverChain standard(const DiseasePairConfig &cfg) {
        ResolverChain c;
        auto dict = std::make_shared<DictionaryResolver>(DictionaryResolver::from_config(cfg));
        c.add(dict);
        c.add(std::make_shared<FuzzyResolver>(dict->table()));
        return c;
    }
    const std::vector<std::shared_ptr<Resolver>> &resolvers() const { return chain_; }

private:
    std::vector<std::shared_ptr<Resolver>> chain_;
};

inline NormalizedEntity normalize_entity(const std::string &surface, const ResolverChain &chain,
                                         const std::string &asserted_type = "Entity") {
    if (trim(surface).empty()) throw Error("normalize_entity: empty surface");
    NormalizedEntity e;
    e.surface = collapse_ws(surface);
    auto asserted = parse_label(asserted_type);
    e.type = asserted.value_or(NodeLabel::Entity);
    for (auto &r : chain.resolvers()) {
        if (auto hit = r->resolve(surface)) {
            e.cui = hit->cui;
            e.resolver = r->kind();
            if (!asserted && hit->type) e.type = *hit->type;
            break;
        }
    }
    return e;
}

struct Triplet {
    NormalizedEntity subject;
    std::string predicate;
    NormalizedEntity object;
    std::string evidence_quote;
    std::string pmid;
    std::string source_model;
    std::optional<std::string> temporal_phrase;
    std::optional<double> confidence;
    bool out_of_schema = false;
    // filled by the anchoring and classification stages
    std::optional<TemporalAnchor> anchor;
    std::vector<std::string> disease_context;
};

inline Triplet normalize_triplet(const RawTriplet &t, const ResolverChain &chain) {
    Triplet n;
    n.subject = normalize_entity(t.subject.surface, chain, t.subject.type);
    n.object = normalize_entity(t.object.surface, chain, t.object.type);
    n.predicate = t.predicate;
    n.evidence_quote = t.evidence_quote;
    n.pmid = t.pmid;
    n.source_model = t.source_model;
    n.temporal_phrase = t.temporal_phrase;
    n.confidence = t.confidence;
    n.out_of_schema = t.out_of_schema;
    return n;
}

struct CorrectionRule {
    std::string id;
    std::string name;
    NodeLabel subject_type;
    std::string predicate;
    NodeLabel object_type;
    std::function<bool(const Triplet &)> guard;  // empty = always
    std::function<void(Triplet &)> transform;
    std::string rationale;

    bool matches(const Triplet &t) const {
        return t.subject.type == subject_type && t.predicate == predicate && t.object.type == object_type &&
               (!guard || guard(t));
    }
};

namespace rules {

inline bool any_of_words(const std::string &text, std::initializer_list<const char *> words) {
    auto t = lower(text);
    for (auto *w : words)
        if (contains(t, w)) return true;
    return false;
}

inline bool therapeutic_procedure(const Triplet &t) {
    return any_of_words(t.subject.surface, {"plasma exchange", "plasmapheresis", "thymectomy", "surgery", "surgical",
                                            "transplant", "resection", "fusion", "tenotomy", "therapy",
                                            "immunoadsorption", "ventilation", "rehabilitation"});
}

inline bool inheritance_object(const Triplet &t) {
    return any_of_words(t.object.surface, {"x-linked", "x linked", "autosomal dominant", "autosomal recessive",
                                           "mitochondrial inheritance", "inheritance", "de novo"});
}

inline bool mentions_loss(const Triplet &t) {
    static const std::regex re("\\b(loss|lose|loses|losing|lost)\\b", std::regex::icase);
    return std::regex_search(t.evidence_quote, re);
}

inline bool diagnostic_subject(const Triplet &t) {
    return any_of_words(t.subject.surface, {"biopsy", "electromyograph", "emg", "nerve conduction",
                                            "repetitive nerve stimulation", "mri", "ultrasound", "genetic testing",
                                            "lumbar puncture", "csf analysis", "single-fiber", "single fiber"});
}

inline bool deficiency_object(const Triplet &t) { return any_of_words(t.object.surface, {"deficien", "absence of"}); }

inline bool autoantibody_object(const Triplet &t) {
    static const std::regex re("(^|[^a-z])anti-|antibod|autoantibod|\\bab\\b", std::regex::icase);
    return std::regex_search(t.object.surface, re);
}

// all letters upper case (digits and hyphens allowed), at least two letters
inline bool uppercase_object(const Triplet &t) {
    size_t letters = 0;
    for (unsigned char c : t.object.surface) {
        if (std::islower(c)) return false;
        if (std::isupper(c)) ++letters;
        if (std::isspace(c)) return false;
    }
    return letters >= 2;
}

inline void swap_ends(Triplet &t) { std::swap(t.subject, t.object); }

inline std::string strip_deficiency(const std::string &s) {
    static const std::regex re("\\s*(deficiency|deficient|absence of)\\s*", std::regex::icase);
    auto out = trim(std::regex_replace(s, re, " "));
    return out.empty() ? s : collapse_ws(out);
}

}  // namespace rules

inline std::vector<CorrectionRule> s10_rules() {
    using L = NodeLabel;
    using namespace rules;
    std::vector<CorrectionRule> r;
    r.push_back({"1", "invert_caused_by_mutation", L::Gene, "CAUSED_BY_MUTATION", L::Disease, {},
                 [](Triplet &t) { swap_ends(t); }, "Fix direction inversion"});
    r.push_back({"2", "invert_treated_with", L::Treatment, "TREATED_WITH", L::Disease, {},
                 [](Triplet &t) { swap_ends(t); }, "Fix direction inversion"});
    r.push_back({"3", "procedure_to_monitored", L::Procedure, "TREATED_WITH", L::Disease,
                 [](const Triplet &t) { return !therapeutic_procedure(t); },
                 [](Triplet &t) {
                     swap_ends(t);
                     t.predicate = "MONITORED_WITH";
                 },
                 "Diagnostics are not treatments"});
    r.push_back({"3b", "therapeutic_proc_invert", L::Procedure, "TREATED_WITH", L::Disease, therapeutic_procedure,
                 [](Triplet &t) { swap_ends(t); }, "Therapeutic: invert only"});
    r.push_back({"4", "mutation_occurs_in", L::Mutation, "ASSOCIATED_WITH", L::Gene, {},
                 [](Triplet &t) { t.predicate = "OCCURS_IN"; }, "Refine generic predicate"});
    r.push_back({"5", "inheritance_pattern", L::Disease, "ASSOCIATED_WITH", L::Entity, inheritance_object,
                 [](Triplet &t) {
                     t.predicate = "HAS_INHERITANCE";
                     t.object.type = L::InheritancePattern;
                 },
                 "Object names an inheritance mode"});
    r.push_back({"6", "entity_treatment_invert", L::Entity, "TREATED_WITH", L::Disease, {},
                 [](Triplet &t) {
                     swap_ends(t);
                     t.object.type = L::Treatment;
                 },
                 "Direction + retype"});
    r.push_back({"7", "measurement_to_monitored", L::Measurement, "TREATED_WITH", L::Disease, {},
                 [](Triplet &t) {
                     swap_ends(t);
                     t.predicate = "MONITORED_WITH";
                 },
                 "Measurements are not treatments"});
    r.push_back({"8", "onset_to_symptom_onset", L::PatientGroup, "HAS_ONSET_AGE", L::Symptom, {},
                 [](Triplet &t) { t.predicate = "SYMPTOM_ONSET_AT"; }, "Refine temporal predicate"});
    r.push_back({"9", "develops_to_loses_func", L::PatientGroup, "DEVELOPS_COMPLICATION_AT",
                 L::PhysiologicalFunction, mentions_loss,
                 [](Triplet &t) { t.predicate = "LOSES_FUNCTION_AT"; }, "Evidence mentions loss"});
    r.push_back({"10", "retype_entity_assoc", L::Entity, "ASSOCIATED_WITH", L::Disease, diagnostic_subject,
                 [](Triplet &t) {
                     t.subject.type = L::Procedure;
                     t.predicate = "USED_FOR_DIAGNOSIS";
                 },
                 "Subject is a diagnostic procedure"});
    r.push_back({"11", "patgrp_proc_to_monitored", L::PatientGroup, "TREATED_WITH", L::Procedure, {},
                 [](Triplet &t) { t.predicate = "MONITORED_WITH"; }, "Diagnostic for patients"});
    r.push_back({"12", "proc_assoc_to_diagnosis", L::Procedure, "ASSOCIATED_WITH", L::Disease, {},
                 [](Triplet &t) { t.predicate = "USED_FOR_DIAGNOSIS"; }, "Refine generic association"});
    r.push_back({"13", "caused_by_protein_state", L::Disease, "CAUSED_BY_MUTATION", L::Entity, deficiency_object,
                 [](Triplet &t) {
                     t.predicate = "LACKS_FEATURE";
                     t.object.type = L::Protein;
                     t.object.surface = strip_deficiency(t.object.surface);
                 },
                 "Object is a deficiency state"});
    r.push_back({"14", "retype_entity_to_gene", L::Disease, "CAUSED_BY_MUTATION", L::Entity, uppercase_object,
                 [](Triplet &t) { t.object.type = L::Gene; }, "Retype Entity as Gene"});
    r.push_back({"15", "protein_assoc_to_target", L::Protein, "ASSOCIATED_WITH", L::Disease, {},
                 [](Triplet &t) { swap_ends(t); }, "Invert receptor-disease"});
    r.push_back({"16", "autoantibody_retype", L::Disease, "CAUSED_BY_MUTATION", L::Entity, autoantibody_object,
                 [](Triplet &t) {
                     t.predicate = "CAUSED_BY";
                     t.object.type = L::Autoantibody;
                 },
                 "Retype autoantibody"});
    r.push_back({"17", "measurement_to_diagnosis", L::Measurement, "ASSOCIATED_WITH", L::Disease, {},
                 [](Triplet &t) { t.predicate = "USED_FOR_DIAGNOSIS"; }, "Antibody measurements"});
    return r;
}

inline const std::vector<std::string> &default_rule_order() {
    static const std::vector<std::string> order = {"16", "1", "2",  "3",  "3b", "4",  "5",  "6",  "7",
                                                   "8",  "9", "10", "11", "12", "13", "14", "15", "17"};
    return order;
}

struct CorrectionResult {
    Triplet triplet;
    std::vector<std::string> fired;
};

class RuleEngine {
public:
    explicit RuleEngine(const std::vector<std::string> &order = default_rule_order()) {
        auto all = s10_rules();
        for (auto &id : order) {
            auto it = std::find_if(all.begin(), all.end(), [&](auto &r) { return r.id == id; });
            if (it == all.end()) throw Error("unknown correction rule '" + id + "'");
            rules_.push_back(*it);
        }
    }
    // single ordered pass, each rule at most once
    CorrectionResult apply(Triplet t) const {
        CorrectionResult res;
        for (auto &r : rules_) {
            if (r.matches(t)) {
                r.transform(t);
                res.fired.push_back(r.id);
            }
        }
        res.triplet = std::move(t);
        return res;
    }
    const std::vector<CorrectionRule> &rules() const { return rules_; }

private:
    std::vector<CorrectionRule> rules_;
};

inline CorrectionResult apply_correction_rules(const Triplet &t) {
    static const RuleEngine engine;
    return engine.apply(t);
}

}  // namespace provgraph
