#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "duration.hpp"
#include "pairconfig.hpp"
#include "util.hpp"

namespace provgraph {

enum class Precision { Exact, Range, Fuzzy, Stage };
enum class ParseStatus { resolved, unresolved };

inline const char *precision_name(Precision p) {
    switch (p) {
    case Precision::Exact: return "Exact";
    case Precision::Range: return "Range";
    case Precision::Fuzzy: return "Fuzzy";
    case Precision::Stage: return "Stage";
    }
    return "?";
}

inline const char *status_name(ParseStatus s) { return s == ParseStatus::resolved ? "resolved" : "unresolved"; }

struct TemporalAnchor {
    int start_months = 0;
    int end_months = 0;
    Precision precision = Precision::Exact;
    ParseStatus status = ParseStatus::unresolved;

    bool resolved() const { return status == ParseStatus::resolved; }
    std::string start() const { return iso_months(start_months); }
    std::string end() const { return iso_months(end_months); }
    std::string display() const {
        if (!resolved()) return "";
        return start_months == end_months ? start() : start() + "-" + end();
    }
    bool operator==(const TemporalAnchor &) const = default;
};

inline TemporalAnchor make_anchor(int s, int e, Precision p) {
    if (e < s) std::swap(s, e);
    if (p == Precision::Exact) e = s;
    return {s, e, p, ParseStatus::resolved};
}

inline int time_index(const TemporalAnchor &a) {
    if (!a.resolved()) throw Error("no index for unresolved anchor");
    // round half up of the midpoint; both ends are whole months
    return (a.start_months + a.end_months + 1) / 2;
}

inline double midpoint_years(const TemporalAnchor &a) { return time_index(a) / 12.0; }

namespace detail {

inline double unit_months(const std::string &unit) {
    auto u = lower(unit);
    if (starts_with(u, "y")) return 12.0;
    if (starts_with(u, "mo")) return 1.0;
    if (starts_with(u, "w")) return 7.0 / 30.4375;
    if (starts_with(u, "d")) return 1.0 / 30.4375;
    return 12.0;
}

inline int to_months(double v, const std::string &unit) {
    return static_cast<int>(std::floor(v * unit_months(unit) + 0.5));
}

inline const std::string &dash() {
    static const std::string d = "(?:-|\xe2\x80\x93|\xe2\x80\x94)";
    return d;
}

inline const std::string &unit_re() {
    static const std::string u = "(years?|yrs?|y/o|months?|mos?|weeks?|wks?|days?)";
    return u;
}

inline const std::string &iso_re() {
    static const std::string r = "P\\d+(?:Y(?:\\d+M)?|M|W|D)";
    return r;
}

inline std::optional<MonthRange> longest_key(const std::string &phrase, const std::map<std::string, MonthRange> &t) {
    std::optional<MonthRange> best;
    size_t best_len = 0;
    for (auto &[k, r] : t)
        if (k.size() > best_len && contains(phrase, k)) {
            best = r;
            best_len = k.size();
        }
    return best;
}

}  // namespace detail

inline TemporalAnchor resolve_temporal(const std::string &phrase, const std::map<std::string, MonthRange> &fuzzy,
                                       const std::map<std::string, MonthRange> &stage) {
    using namespace detail;
    const auto num = std::string("(\\d+(?:\\.\\d+)?)");
    static const std::regex iso_range("\\b(" + iso_re() + ")\\s*" + dash() + "\\s*(" + iso_re() + ")");
    static const std::regex nat_range(num + "\\s*(?:" + dash() + "|to|and)\\s*" + num + "(?:\\s*|-)" + unit_re(),
                                      std::regex::icase);
    static const std::regex ages_range("ages?\\s+" + num + "\\s*(?:" + dash() + "|to|and)\\s*" + num,
                                       std::regex::icase);
    static const std::regex iso_single("\\b(" + iso_re() + ")");
    static const std::regex age_single("\\bage[sd]?\\s+(?:of\\s+)?" + num + "(?:\\s*" + unit_re() + ")?",
                                       std::regex::icase);
    static const std::regex nat_single(num + "(?:\\s*|-)" + unit_re() + "(?![a-z])", std::regex::icase);

    std::smatch m;
    // a range construct anywhere makes the phrase a Range, never an Exact
    if (std::regex_search(phrase, m, iso_range)) {
        auto a = parse_iso_duration(m[1].str()), b = parse_iso_duration(m[2].str());
        if (a && b) return make_anchor(*a, *b, Precision::Range);
    }
    if (std::regex_search(phrase, m, nat_range)) {
        auto unit = m[3].str();
        return make_anchor(to_months(std::stod(m[1].str()), unit), to_months(std::stod(m[2].str()), unit),
                           Precision::Range);
    }
    if (std::regex_search(phrase, m, ages_range))
        return make_anchor(to_months(std::stod(m[1].str()), "y"), to_months(std::stod(m[2].str()), "y"),
                           Precision::Range);

    if (std::regex_search(phrase, m, iso_single)) {
        if (auto a = parse_iso_duration(m[1].str())) return make_anchor(*a, *a, Precision::Exact);
    }
    if (std::regex_search(phrase, m, age_single)) {
        auto unit = m[2].matched ? m[2].str() : "years";
        int v = to_months(std::stod(m[1].str()), unit);
        return make_anchor(v, v, Precision::Exact);
    }
    if (std::regex_search(phrase, m, nat_single)) {
        int v = to_months(std::stod(m[1].str()), m[2].str());
        return make_anchor(v, v, Precision::Exact);
    }

    const auto folded = fold(phrase);
    if (auto r = longest_key(folded, fuzzy)) return make_anchor(r->start, r->end, Precision::Fuzzy);
    if (auto r = longest_key(folded, stage)) return make_anchor(r->start, r->end, Precision::Stage);
    return TemporalAnchor{};
}

inline TemporalAnchor resolve_temporal(const std::string &phrase, const DiseasePairConfig &cfg) {
    return resolve_temporal(phrase, cfg.fuzzy_table, cfg.stage_table);
}

inline TemporalAnchor resolve_temporal(const std::string &phrase) {
    static const auto fz = default_fuzzy_table();
    static const auto st = default_stage_table();
    return resolve_temporal(phrase, fz, st);
}

struct Span {
    size_t offset = 0;
    size_t length = 0;
    std::string text;
    bool operator==(const Span &) const = default;
};

struct TemporalClaims {
    size_t count = 0;
    std::vector<Span> spans;
};

inline const std::vector<std::regex> &claim_patterns() {
    using namespace detail;
    static const std::vector<std::regex> pats = [] {
        const std::string num = "\\d+(?:\\.\\d+)?";
        const std::string iso = iso_re();
        std::vector<std::regex> v;
        // ISO tokens, optionally a range and open-ended "+"
        v.emplace_back("\\b" + iso + "(?:\\s*" + dash() + "\\s*" + iso + ")?\\+?");
        // "age 3-5 years", "2-4 weeks", "7-14-day", "13 to 16 years"
        v.emplace_back("(?:\\bages?d?\\s+)?" + num + "\\s*(?:" + dash() + "|to)\\s*" + num + "(?:\\s*|-)" +
                           "(?:years?|yrs?|months?|weeks?|days?)(?![a-z])",
                       std::regex::icase);
        // "at age 11", "age 13 years", "aged 40"
        v.emplace_back("\\bage[sd]?\\s+(?:of\\s+)?" + num + "(?:\\s*(?:" + dash() + "|to)\\s*" + num + ")?" +
                           "(?:\\s*(?:years?|months?))?(?![a-z0-9])",
                       std::regex::icase);
        return v;
    }();
    return pats;
}

// non-overlapping, leftmost-longest across all patterns
inline TemporalClaims extract_temporal_claims(const std::string &text) {
    std::vector<Span> cand;
    for (auto &re : claim_patterns())
        for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
            cand.push_back({static_cast<size_t>(it->position()), static_cast<size_t>(it->length()), it->str()});
    std::sort(cand.begin(), cand.end(), [](const Span &a, const Span &b) {
        return a.offset != b.offset ? a.offset < b.offset : a.length > b.length;
    });
    TemporalClaims out;
    size_t covered = 0;
    for (auto &s : cand) {
        if (s.length == 0 || s.offset < covered) continue;
        out.spans.push_back(s);
        covered = s.offset + s.length;
    }
    out.count = out.spans.size();
    return out;
}

}  // namespace provgraph
