#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace provgraph {

enum class Pred {
    ASSOCIATED_WITH,
    MANIFESTS_AS,
    TREATED_WITH,
    RESPONDS_TO,
    HAS_MEASUREMENT,
    HAS_ONSET_AGE,
    HAS_SEVERITY,
    HAS_PREVALENCE,
    LACKS_FEATURE,
    HAS_DIAGNOSIS_AGE,
    HAS_DURATION,
    GENERALIZED_AT,
    REMISSION_AT,
    PRECEDES,
    CRISIS_AT,
    DEVELOPS_COMPLICATION_AT,
    PRESERVES_FUNCTION,
    HAS_SURVIVAL_TO,
    DIFFERENTIATES_FROM,
    REQUIRES_INTERVENTION_AT,
};

inline constexpr std::array<std::string_view, 20> kAllPredicates = {
    "ASSOCIATED_WITH", "MANIFESTS_AS", "TREATED_WITH", "RESPONDS_TO",
    "HAS_MEASUREMENT", "HAS_ONSET_AGE", "HAS_SEVERITY", "HAS_PREVALENCE", "LACKS_FEATURE",
    "HAS_DIAGNOSIS_AGE", "HAS_DURATION", "GENERALIZED_AT", "REMISSION_AT", "PRECEDES",
    "CRISIS_AT", "DEVELOPS_COMPLICATION_AT", "PRESERVES_FUNCTION", "HAS_SURVIVAL_TO",
    "DIFFERENTIATES_FROM", "REQUIRES_INTERVENTION_AT",
};

inline constexpr std::array<std::string_view, 9> kDifferentialPredicates = {
    "MANIFESTS_AS", "ASSOCIATED_WITH", "TREATED_WITH",
    "RESPONDS_TO", "LACKS_FEATURE", "DIFFERENTIATES_FROM", "HAS_PREVALENCE",
    "HAS_ONSET_AGE", "HAS_SEVERITY",
};

inline constexpr std::array<std::string_view, 10> kTemporalPredicates = {
    "HAS_ONSET_AGE", "HAS_DIAGNOSIS_AGE", "GENERALIZED_AT",
    "CRISIS_AT", "REMISSION_AT", "DEVELOPS_COMPLICATION_AT", "REQUIRES_INTERVENTION_AT",
    "HAS_SURVIVAL_TO", "HAS_DURATION", "PRECEDES",
};

inline constexpr std::array<std::string_view, 2> kTreatmentPredicates = {"TREATED_WITH", "RESPONDS_TO"};

// produced by the correction rules; legal on edges but outside the retrieval set
inline constexpr std::array<std::string_view, 8> kExtractionOnlyPredicates = {
    "CAUSED_BY_MUTATION", "CAUSED_BY", "MONITORED_WITH", "OCCURS_IN",
    "HAS_INHERITANCE", "SYMPTOM_ONSET_AT", "LOSES_FUNCTION_AT", "USED_FOR_DIAGNOSIS",
};

template <size_t N>
constexpr bool in(const std::array<std::string_view, N> &a, std::string_view s) {
    return std::find(a.begin(), a.end(), s) != a.end();
}

inline bool is_retrieval_predicate(std::string_view s) { return in(kAllPredicates, s); }
inline bool is_known_predicate(std::string_view s) { return in(kAllPredicates, s) || in(kExtractionOnlyPredicates, s); }
inline bool is_temporal(std::string_view s) { return in(kTemporalPredicates, s); }
inline bool is_treatment(std::string_view s) { return in(kTreatmentPredicates, s); }
inline bool is_differential(std::string_view s) { return in(kDifferentialPredicates, s); }

inline std::string_view name(Pred p) { return kAllPredicates[static_cast<size_t>(p)]; }

inline std::optional<Pred> parse_pred(std::string_view s) {
    for (size_t i = 0; i < kAllPredicates.size(); ++i)
        if (kAllPredicates[i] == s) return static_cast<Pred>(i);
    return std::nullopt;
}

struct PredFlags {
    bool temporal, treatment, differential;
};
inline PredFlags flags(Pred p) {
    auto n = name(p);
    return {is_temporal(n), is_treatment(n), is_differential(n)};
}

enum class NodeLabel {
    Disease, Entity, Gene, Protein, Treatment, Symptom, ClinicalFinding, Measurement,
    Procedure, PatientGroup, Mutation, Autoantibody, InheritancePattern, PhysiologicalFunction,
};

inline constexpr std::array<std::string_view, 14> kNodeLabels = {
    "Disease", "Entity", "Gene", "Protein", "Treatment", "Symptom", "ClinicalFinding", "Measurement",
    "Procedure", "PatientGroup", "Mutation", "Autoantibody", "InheritancePattern", "PhysiologicalFunction",
};

inline std::string_view label_name(NodeLabel l) { return kNodeLabels[static_cast<size_t>(l)]; }

// accepts a few abbreviations providers tend to emit
inline std::optional<NodeLabel> parse_label(std::string_view s) {
    for (size_t i = 0; i < kNodeLabels.size(); ++i)
        if (kNodeLabels[i] == s) return static_cast<NodeLabel>(i);
    if (s == "PatientGrp") return NodeLabel::PatientGroup;
    if (s == "PhysFunc") return NodeLabel::PhysiologicalFunction;
    if (s == "InheritPattern") return NodeLabel::InheritancePattern;
    if (s == "Drug") return NodeLabel::Treatment;
    return std::nullopt;
}

}  // namespace provgraph
