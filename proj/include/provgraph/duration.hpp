#pragma once

#include <optional>
#include <regex>
#include <string>

#include "util.hpp"

namespace provgraph {

// ISO-8601 durations at year/month granularity, stored as whole months.
// Weeks and days are converted (1W = 7/30.4375 M, 1D = 1/30.4375 M) and
// rounded half up; sub-month anchors collapse to 0 or 1 month.
inline std::optional<int> parse_iso_duration(const std::string &s) {
    static const std::regex re(R"(^P(?:(\d+)Y)?(?:(\d+)M)?(?:(\d+)W)?(?:(\d+)D)?$)");
    std::smatch m;
    if (!std::regex_match(s, m, re) || s == "P") return std::nullopt;
    auto g = [&](int i) { return m[i].matched ? std::stod(m[i].str()) : 0.0; };
    double months = g(1) * 12 + g(2) + (g(3) * 7 + g(4)) / 30.4375;
    return static_cast<int>(std::floor(months + 0.5));
}

inline std::string iso_months(int months) {
    if (months == 0) return "P0M";
    std::string out = "P";
    if (months >= 12) out += std::to_string(months / 12) + "Y";
    if (months % 12) out += std::to_string(months % 12) + "M";
    return out;
}

}  // namespace provgraph
