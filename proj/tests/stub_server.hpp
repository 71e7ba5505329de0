#pragma once

// In-process HTTP server speaking the backend wire protocol, answering from a
// FixtureBackend. Used to exercise RemoteBackend end to end.

#include <atomic>
#include <chrono>
#include <memory>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>

#include "kaleido/backend.hpp"

namespace kaleido::testing {

class StubBackendServer {
public:
    explicit StubBackendServer(std::shared_ptr<const Backend> inner, int delay_ms = 0)
        : inner_(std::move(inner)), delay_ms_(delay_ms) {
        auto wrap = [this](auto body) {
            return [this, body](const httplib::Request& req, httplib::Response& res) {
                const int now = ++in_flight_;
                int seen = max_in_flight_.load();
                while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
                }
                ++requests_;
                if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
                try {
                    res.set_content(body(json::parse(req.body)).dump(), "application/json");
                } catch (const std::exception& e) {
                    res.status = 404;
                    res.set_content(e.what(), "text/plain");
                }
                --in_flight_;
            };
        };
        server_.Post("/v1/backend/generate", wrap([this](const json& j) {
            json out{{"candidates", json::array()}};
            for (const auto& c : inner_->generate(j.at("prompt"), j.at("num_return")))
                out["candidates"].push_back({{"text", c.text}, {"score", c.score}});
            return out;
        }));
        server_.Post("/v1/backend/classify", wrap([this](const json& j) {
            return json{{"probs", inner_->classify(j.at("prompt"), j.at("labels").get<std::vector<std::string>>())}};
        }));
        server_.Post("/v1/backend/embed", wrap([this](const json& j) {
            return json{{"vectors", inner_->embed(j.at("texts").get<std::vector<std::string>>())}};
        }));
        server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
        server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubBackendServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int port() const { return port_; }
    int max_in_flight() const { return max_in_flight_; }
    int requests() const { return requests_; }

private:
    std::shared_ptr<const Backend> inner_;
    int delay_ms_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> in_flight_{0}, max_in_flight_{0}, requests_{0};
};

/// A port with nothing listening on it (bound, then closed).
inline int unused_port() {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

}  // namespace kaleido::testing
