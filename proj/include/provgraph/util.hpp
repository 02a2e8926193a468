#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace provgraph {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// field path travels with the message so config typos are findable
struct ConfigError : Error {
    std::string path;
    ConfigError(std::string p, const std::string &msg)
        : Error(p.empty() ? msg : p + ": " + msg), path(std::move(p)) {}
};

// network or provider hiccup; callers may retry
struct TransportError : Error {
    using Error::Error;
};

struct ParseError : Error {
    std::string raw;
    ParseError(const std::string &msg, std::string r) : Error(msg), raw(std::move(r)) {}
};

struct PrivacyError : Error {
    std::string component;
    PrivacyError(std::string c, const std::string &msg) : Error(msg), component(std::move(c)) {}
};

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::string upper(std::string_view s) {
    std::string out(s);
    for (auto &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string collapse_ws(std::string_view s) {
    auto toks = split_ws(s);
    std::string out;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

// case-folded, whitespace-collapsed
inline std::string fold(std::string_view s) { return lower(collapse_ws(s)); }

inline bool contains(std::string_view hay, std::string_view needle) {
    return hay.find(needle) != std::string_view::npos;
}

inline bool icontains(std::string_view hay, std::string_view needle) {
    return lower(hay).find(lower(needle)) != std::string::npos;
}

inline bool starts_with(std::string_view s, std::string_view p) {
    return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

inline std::string fixed(double v, int dp) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", dp, v);
    std::string s = buf;
    if (s == "-0" || starts_with(s, "-0.") && s.find_first_not_of("-0.") == std::string::npos)
        s.erase(0, 1);
    return s;
}

inline std::string join(const std::vector<std::string> &v, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

inline std::string md5_hex(std::string_view s) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(s.data(), s.size(), md, &len, EVP_md5(), nullptr);
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

template <class T>
void sort_unique(std::vector<T> &v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace provgraph
