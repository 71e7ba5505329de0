#pragma once

// HTTP facade over the pipeline and decision engine.
//
//   POST /v1/values  {action, params?}                      -> PipelineOutput
//   POST /v1/decide  {action?, candidates, weights?, binary?} -> DecisionResult
//   POST /v1/explain {action, kind, text}                    -> {explanation}
//   GET  /healthz                                            -> {status, backend}
//
// Error bodies are {"error": message, "code": short_code}. The handlers are
// plain functions of the request body so they can be exercised without a
// socket; the server only routes to them.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "kaleido/backend.hpp"
#include "kaleido/core.hpp"
#include "kaleido/decision.hpp"
#include "kaleido/pipeline.hpp"
#include "kaleido/remote_backend.hpp"

namespace kaleido {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    BackendDescriptor backend;
    SystemParams params = published_params();
    int request_timeout_ms = 30000;
    int max_concurrent = 8;
    std::string cors_origin;  // empty disables CORS headers
};

/// Parses the config object. Relative fixture paths resolve against
/// base_dir. The "bind" key ("host:port") is ignored when allow_bind is false.
inline ServiceConfig service_config_from_json(const json& j, const std::filesystem::path& base_dir = {},
                                              bool allow_bind = true) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    ServiceConfig c;
    if (allow_bind && j.contains("bind")) {
        auto bind = j.at("bind").get<std::string>();
        auto colon = bind.rfind(':');
        if (colon == std::string::npos) throw InvalidArgument("bind must be host:port");
        c.host = bind.substr(0, colon);
        try {
            c.port = std::stoi(bind.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidArgument("bind port is not a number");
        }
    }
    if (j.contains("backend")) {
        c.backend = descriptor_from_json(j.at("backend"));
        if (!c.backend.fixture_path.empty() && std::filesystem::path(c.backend.fixture_path).is_relative() && !base_dir.empty())
            c.backend.fixture_path = (base_dir / c.backend.fixture_path).string();
    }
    if (j.contains("params")) c.params = params_from_json(j.at("params"));
    if (auto err = validate_params(c.params)) throw InvalidArgument("config params: " + *err);
    c.request_timeout_ms = j.value("request_timeout_ms", c.request_timeout_ms);
    c.max_concurrent = j.value("max_concurrent", c.max_concurrent);
    c.cors_origin = j.value("cors_origin", std::string());
    if (c.request_timeout_ms < 1) throw InvalidArgument("request_timeout_ms must be >= 1");
    if (c.max_concurrent < 1) throw InvalidArgument("max_concurrent must be >= 1");
    return c;
}

inline ServiceConfig load_service_config(const std::filesystem::path& path, bool allow_bind = true) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("config " + path.string() + ": " + e.what());
    }
    return service_config_from_json(j, path.parent_path(), allow_bind);
}

struct HttpReply {
    int status = 200;
    std::string body;
};

inline HttpReply error_reply(int status, const std::string& code, const std::string& message) {
    ordered_json j;
    j["error"] = message;
    j["code"] = code;
    return {status, j.dump()};
}

class Service {
public:
    Service(ServiceConfig config, std::shared_ptr<const Backend> backend)
        : config_(std::move(config)), backend_(std::move(backend)) {
        if (!backend_) throw InvalidArgument("service needs a backend");
    }

    const ServiceConfig& config() const { return config_; }

    HttpReply handle_values(const std::string& body) const {
        json req;
        if (auto bad = parse_body(body, req)) return *bad;
        if (!req.contains("action") || !req["action"].is_string() || trim_view(req["action"].get<std::string>()).empty())
            return error_reply(422, "empty_action", "action must be a non-empty string");
        SystemParams params = config_.params;
        if (req.contains("params") && !req["params"].is_null()) {
            try {
                params = params_from_json(req["params"], config_.params);
            } catch (const std::exception& e) {
                return error_reply(400, "invalid_params", e.what());
            }
            if (auto err = validate_params(params)) return error_reply(400, "invalid_params", *err);
        }
        return guarded([&] { return to_json(generate_values(*backend_, req["action"].get<std::string>(), params)).dump(); });
    }

    HttpReply handle_decide(const std::string& body) const {
        json req;
        if (auto bad = parse_body(body, req)) return *bad;
        std::vector<ScoredCandidate> candidates;
        WeightOverrides weights;
        bool binary = false;
        try {
            if (!req.contains("candidates") || !req["candidates"].is_array())
                throw InvalidArgument("candidates must be an array");
            for (const auto& c : req["candidates"]) candidates.push_back(candidate_from_json(c));
            if (req.contains("weights")) weights = weights_from_json(req["weights"]);
            if (req.contains("binary")) binary = req["binary"].get<bool>();
        } catch (const std::exception& e) {
            return error_reply(400, "invalid_candidates", e.what());
        }
        try {
            return {200, to_json(decide(candidates, weights, binary)).dump()};
        } catch (const InvalidArgument& e) {
            return error_reply(400, "no_effective_evidence", e.what());
        }
    }

    HttpReply handle_explain(const std::string& body) const {
        json req;
        if (auto bad = parse_body(body, req)) return *bad;
        ValueEntry entry;
        std::string action;
        try {
            action = req.at("action").get<std::string>();
            auto kind = kind_from_string(req.at("kind").get<std::string>());
            if (!kind) throw InvalidArgument("unknown kind");
            entry = make_entry(*kind, req.at("text").get<std::string>());
        } catch (const std::exception& e) {
            return error_reply(400, "bad_request", e.what());
        }
        if (trim_view(action).empty()) return error_reply(422, "empty_action", "action must be a non-empty string");
        return guarded([&] {
            ordered_json j;
            j["explanation"] = explain(*backend_, action, entry);
            return j.dump();
        });
    }

    HttpReply handle_health() const {
        bool ok = false;
        try {
            ok = backend_->healthy();
        } catch (const std::exception&) {
            ok = false;
        }
        ordered_json j;
        j["status"] = ok ? "ok" : "unavailable";
        j["backend"] = backend_->mode();
        return {ok ? 200 : 503, j.dump()};
    }

    /// Binds and starts serving on a background thread. Port 0 picks a free
    /// port; the chosen one is returned.
    int start() {
        configure_server();
        int port = config_.port == 0 ? server_.bind_to_any_port(config_.host) : (server_.bind_to_port(config_.host, config_.port) ? config_.port : -1);
        if (port < 0) throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
        bound_port_ = port;
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port;
    }

    /// Binds and serves on the calling thread until stop().
    void run() {
        configure_server();
        if (!server_.listen(config_.host, config_.port))
            throw Error("cannot serve on " + config_.host + ":" + std::to_string(config_.port));
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    int port() const { return bound_port_; }

    ~Service() { stop(); }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

private:
    static std::optional<HttpReply> parse_body(const std::string& body, json& out) {
        try {
            out = json::parse(body);
        } catch (const json::exception& e) {
            return error_reply(400, "bad_json", e.what());
        }
        if (!out.is_object()) return error_reply(400, "bad_json", "request body must be a JSON object");
        return std::nullopt;
    }

    template <typename F>
    static HttpReply guarded(F&& f) {
        try {
            return {200, f()};
        } catch (const BackendError& e) {
            return error_reply(502, "backend_error", e.what());
        } catch (const InvalidArgument& e) {
            return error_reply(400, "bad_request", e.what());
        } catch (const std::exception& e) {
            return error_reply(500, "internal", e.what());
        }
    }

    void configure_server() {
        if (configured_) return;
        configured_ = true;
        const int n = config_.max_concurrent;
        server_.new_task_queue = [n] { return new httplib::ThreadPool(static_cast<std::size_t>(n)); };
        const auto secs = config_.request_timeout_ms / 1000, usecs = (config_.request_timeout_ms % 1000) * 1000;
        server_.set_read_timeout(secs, usecs);
        server_.set_write_timeout(secs, usecs);

        auto route = [this](auto handler) {
            return [this, handler](const httplib::Request& req, httplib::Response& res) {
                HttpReply r = (this->*handler)(req.body);
                res.status = r.status;
                res.set_content(r.body, "application/json");
            };
        };
        server_.Post("/v1/values", route(&Service::handle_values));
        server_.Post("/v1/decide", route(&Service::handle_decide));
        server_.Post("/v1/explain", route(&Service::handle_explain));
        server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
            auto r = handle_health();
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        if (!config_.cors_origin.empty()) {
            const auto origin = config_.cors_origin;
            server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
            server_.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
                res.set_header("Access-Control-Allow-Origin", origin);
                res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
                res.set_header("Access-Control-Allow-Headers", "Content-Type");
            });
        }
    }

    ServiceConfig config_;
    std::shared_ptr<const Backend> backend_;
    httplib::Server server_;
    std::thread thread_;
    bool configured_ = false;
    int bound_port_ = -1;
};

}  // namespace kaleido
