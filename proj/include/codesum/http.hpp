#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>

namespace codesum::http {

// Connection-level failure (DNS, refused, timeout, TLS).
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Endpoint {
    std::string scheme_host_port;  // e.g. "https://api.openai.com"
    std::string path_prefix;       // e.g. "/v1"
};

// Splits a base URL such as "http://localhost:8080/v1/" into host and path parts.
Endpoint parse_base_url(const std::string& base_url);

struct Response {
    int status = 0;
    std::string body;
};

Response post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                   const std::map<std::string, std::string>& headers, std::chrono::seconds timeout);

}  // namespace codesum::http
