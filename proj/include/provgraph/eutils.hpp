#pragma once

// HTTPS transport for the live PubMed client. Needs CPPHTTPLIB_OPENSSL_SUPPORT
// and OpenSSL::SSL at link time (the provgraph_net target).

#include <httplib.h>

#include <string>

#include "citeverify.hpp"

namespace provgraph {

inline EsummaryFetch https_esummary_fetch(int timeout_s = 20) {
    return [timeout_s](const std::string &pmid) {
        httplib::Client cli("https://eutils.ncbi.nlm.nih.gov");
        cli.set_connection_timeout(timeout_s);
        cli.set_read_timeout(timeout_s);
        cli.set_follow_location(true);
        auto res = cli.Get("/entrez/eutils/esummary.fcgi?db=pubmed&id=" + pmid + "&retmode=xml");
        if (!res) throw TransportError("esummary " + pmid + ": " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500)
            throw TransportError("esummary " + pmid + ": HTTP " + std::to_string(res->status));
        if (res->status != 200) throw ParseError("esummary " + pmid + ": HTTP " + std::to_string(res->status), res->body);
        return res->body;
    };
}

}  // namespace provgraph
