#include "codesum/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fmt/format.h>

namespace codesum::http {

Endpoint parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument(fmt::format("base URL '{}' lacks a scheme", base_url));
    }
    const auto scheme = base_url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw std::invalid_argument(fmt::format("unsupported URL scheme '{}'", scheme));
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint ep;
    if (path_start == std::string::npos) {
        ep.scheme_host_port = base_url;
    } else {
        ep.scheme_host_port = base_url.substr(0, path_start);
        ep.path_prefix = base_url.substr(path_start);
        while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') {
            ep.path_prefix.pop_back();
        }
    }
    return ep;
}

Response post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                   const std::map<std::string, std::string>& headers, std::chrono::seconds timeout) {
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) {
        h.emplace(k, v);
    }
    auto result = client.Post(endpoint.path_prefix + path, h, body, "application/json");
    if (!result) {
        throw TransportError(fmt::format("POST {}{}{} failed: {}", endpoint.scheme_host_port, endpoint.path_prefix,
                                         path, httplib::to_string(result.error())));
    }
    return Response{result->status, result->body};
}

}  // namespace codesum::http
