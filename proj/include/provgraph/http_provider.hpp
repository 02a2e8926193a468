#pragma once

// OpenAI-compatible chat-completions backend. Endpoint, key and model come
// from PROVGRAPH_<ID>_URL / _KEY / _MODEL, where <ID> is the provider id
// upper-cased with non-alphanumerics replaced by '_'.

#include <httplib.h>

#include <cstdlib>
#include <memory>
#include <regex>
#include <string>

#include "extraction.hpp"

namespace provgraph {

struct HttpEndpoint {
    std::string scheme_host_port;  // "https://api.example.org:443"
    std::string host;
    std::string path = "/v1/chat/completions";
    std::string key;
    std::string model;
};

inline HttpEndpoint parse_endpoint(const std::string &url) {
    static const std::regex re(R"(^(https?)://(\[[^\]]+\]|[^/:]+)(?::(\d+))?(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("endpoint", "bad url: " + url);
    HttpEndpoint e;
    e.host = m[2].str();
    if (e.host.front() == '[') e.host = e.host.substr(1, e.host.size() - 2);
    e.scheme_host_port = lower(m[1].str()) + "://" + m[2].str() + (m[3].matched ? ":" + m[3].str() : "");
    if (m[4].matched && m[4].str() != "/") e.path = m[4].str();
    return e;
}

inline std::string env_name(const std::string &id, const std::string &suffix) {
    std::string s = "PROVGRAPH_";
    for (char c : id) s += std::isalnum(static_cast<unsigned char>(c)) ? char(std::toupper(c)) : '_';
    return s + "_" + suffix;
}

inline std::optional<HttpEndpoint> endpoint_from_env(const std::string &id) {
    const char *url = std::getenv(env_name(id, "URL").c_str());
    if (!url || !*url) return std::nullopt;
    auto e = parse_endpoint(url);
    if (const char *k = std::getenv(env_name(id, "KEY").c_str())) e.key = k;
    const char *m = std::getenv(env_name(id, "MODEL").c_str());
    e.model = m && *m ? m : id;
    return e;
}

inline std::string screening_prompt(const DiseasePairConfig &cfg) {
    std::string names;
    for (auto &d : cfg.diseases) names += (names.empty() ? "" : " / ") + d.full_name;
    return "You screen PubMed abstracts for a knowledge graph about " + names +
           ".\nDecide whether the abstract contains extractable clinical relationships for these diseases.\n"
           "Reply with JSON only: {\"extract\": true|false, \"confidence\": <0..1>}";
}

inline std::string extraction_prompt(const DiseasePairConfig &cfg) {
    std::string preds;
    for (auto p : kAllPredicates) preds += std::string(p) + ", ";
    for (auto p : kExtractionOnlyPredicates) preds += std::string(p) + ", ";
    preds.resize(preds.size() - 2);
    std::string s =
        "Extract subject-predicate-object triplets from the abstract.\nAllowed predicates: " + preds +
        ".\nEvery triplet needs an evidence_quote copied verbatim from the abstract. Add temporal_phrase when the "
        "relationship has a time component.\nReply with JSON only: {\"triplets\": [{\"subject\", \"subject_type\", "
        "\"predicate\", \"object\", \"object_type\", \"evidence_quote\", \"temporal_phrase\", \"confidence\"}]}";
    if (!cfg.extraction_yaml.empty()) s += "\n\nContext:\n" + cfg.extraction_yaml;
    return s;
}

class HttpProvider : public ModelProvider {
public:
    HttpProvider(std::string id, HttpEndpoint ep, int timeout_s = 300)
        : id_(std::move(id)), ep_(std::move(ep)), timeout_(timeout_s) {}

    static std::unique_ptr<HttpProvider> from_env(const std::string &id) {
        auto ep = endpoint_from_env(id);
        if (!ep) throw ConfigError(env_name(id, "URL"), "not set for provider " + id);
        return std::make_unique<HttpProvider>(id, *ep);
    }

    std::string id() const override { return id_; }
    std::string endpoint_host() const override { return ep_.host; }

    ScreenReply screen(const Abstract &a, const DiseasePairConfig &cfg) override {
        auto raw = complete(screening_prompt(cfg), a.title + "\n\n" + a.text, {0.0, 200, true});
        auto j = parse_reply(raw);
        return {j.value("extract", false), j.value("confidence", 0.0)};
    }

    std::vector<RawTriplet> extract(const Abstract &a, const DiseasePairConfig &cfg) override {
        auto raw = complete(extraction_prompt(cfg), a.title + "\n\n" + a.text, {0.0, 8000, true});
        auto j = parse_reply(raw);
        std::vector<RawTriplet> out;
        const json &arr = j.is_array() ? j : j.value("triplets", json::array());
        for (auto &t : arr) {
            try {
                out.push_back(triplet_from_json(t));
            } catch (const json::exception &) {
                log(LogLevel::Warn, "extract " + a.pmid + ": skipping malformed triplet from " + id_);
            }
        }
        return out;
    }

    std::string complete(const std::string &system, const std::string &user, const GenParams &p) override {
        json body{{"model", ep_.model},
                  {"temperature", p.temperature},
                  {"max_tokens", p.max_tokens},
                  {"messages", json::array({json{{"role", "system"}, {"content", system}},
                                            json{{"role", "user"}, {"content", user}}})}};
        if (p.json_mode) body["response_format"] = json{{"type", "json_object"}};
        httplib::Client cli(ep_.scheme_host_port);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        httplib::Headers h;
        if (!ep_.key.empty()) h.emplace("Authorization", "Bearer " + ep_.key);
        auto res = cli.Post(ep_.path, h, body.dump(), "application/json");
        if (!res) throw TransportError(id_ + ": " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500)
            throw TransportError(id_ + ": HTTP " + std::to_string(res->status));
        if (res->status != 200) throw ParseError(id_ + ": HTTP " + std::to_string(res->status), res->body);
        try {
            auto j = json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception &e) {
            throw ParseError(id_ + ": unexpected completion payload: " + e.what(), res->body);
        }
    }

private:
    json parse_reply(const std::string &raw) const {
        auto b = raw.find_first_of("{["), e = raw.find_last_of("}]");
        if (b == std::string::npos || e == std::string::npos || e < b) throw ParseError(id_ + ": no JSON in reply", raw);
        try {
            return json::parse(raw.substr(b, e - b + 1));
        } catch (const json::exception &) {
            throw ParseError(id_ + ": malformed JSON reply", raw);
        }
    }

    std::string id_;
    HttpEndpoint ep_;
    int timeout_;
};

}  // namespace provgraph
