#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <string>
#include <thread>

namespace testing {

// Local HTTP server on an ephemeral port, stopped on destruction.
class MockServer {
public:
    httplib::Server server;

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~MockServer() {
        server.stop();
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    std::string base_url(const std::string& prefix = "/v1") const {
        return "http://127.0.0.1:" + std::to_string(port_) + prefix;
    }

private:
    int port_ = 0;
    std::thread thread_;
};

}  // namespace testing
