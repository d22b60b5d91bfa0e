#pragma once

// JSON-over-HTTP POST shared by the remote embedding and LLM clients.

#include <chrono>
#include <string>
#include <string_view>

#include <httplib.h>

#include "kgrag/error.hpp"

namespace kgrag {

/// "scheme://host[:port]" plus the request path ("/" when absent).
struct Endpoint {
    std::string base;
    std::string path;
    std::string url;
};

inline Endpoint parse_endpoint(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw Error(ErrorKind::invalid_argument, std::string(url), "URL must start with http:// or https://");
    }
    const std::string_view scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorKind::invalid_argument, std::string(url), "unsupported scheme");
    }
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    Endpoint ep;
    ep.url = std::string(url);
    if (path_start == std::string_view::npos) {
        ep.base = std::string(url);
        ep.path = "/";
    } else {
        ep.base = std::string(url.substr(0, path_start));
        ep.path = std::string(url.substr(path_start));
    }
    if (ep.base.size() == host_start) {
        throw Error(ErrorKind::invalid_argument, std::string(url), "missing host");
    }
    return ep;
}

struct HttpResponse {
    int status = 0;
    std::string body;
};

inline HttpResponse post_json(const Endpoint& endpoint, const std::string& body,
                              const std::string& bearer_token,
                              std::chrono::seconds timeout = std::chrono::seconds(120)) {
    httplib::Client client(endpoint.base);
    if (!client.is_valid()) {
        throw Error(ErrorKind::transport_error, endpoint.url, "cannot create HTTP client");
    }
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (!bearer_token.empty()) client.set_bearer_token_auth(bearer_token);
    auto result = client.Post(endpoint.path, body, "application/json");
    if (!result) {
        throw Error(ErrorKind::transport_error, endpoint.url, httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

inline bool is_success(int status) { return status >= 200 && status < 300; }

} // namespace kgrag
