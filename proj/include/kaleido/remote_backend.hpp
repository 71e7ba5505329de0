#pragma once

// JSON-over-HTTP backend client and backend construction from a descriptor.
//
//   POST {base}/v1/backend/generate  {"prompt", "num_return"} -> {"candidates": [{"text", "score"}]}
//   POST {base}/v1/backend/classify  {"prompt", "labels"}     -> {"probs": [num]}
//   POST {base}/v1/backend/embed     {"texts"}                -> {"vectors": [[num]]}

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <string>

#include <httplib.h>

#include "kaleido/backend.hpp"

namespace kaleido {

class RemoteBackend final : public Backend {
public:
    RemoteBackend(std::string base_url, int timeout_ms = 30000, int max_in_flight = 8)
        : timeout_ms_(timeout_ms), slots_(max_in_flight) {
        if (max_in_flight < 1) throw InvalidArgument("max_in_flight must be >= 1");
        if (timeout_ms < 1) throw InvalidArgument("timeout must be >= 1 ms");
        while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
        auto scheme = base_url.find("://");
        auto path_start = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (path_start == std::string::npos) {
            host_ = base_url;
        } else {
            host_ = base_url.substr(0, path_start);
            prefix_ = base_url.substr(path_start);
        }
        if (host_.empty()) throw InvalidArgument("empty backend base_url");
    }

    std::vector<GenerationCandidate> generate(const std::string& prompt, int n) const override {
        detail::check_generate_args(n);
        auto res = post("/v1/backend/generate", json{{"prompt", prompt}, {"num_return", n}});
        std::vector<GenerationCandidate> out;
        try {
            for (const auto& c : res.at("candidates")) {
                GenerationCandidate g{c.at("text").get<std::string>(), c.at("score").get<double>()};
                if (g.text.empty()) throw ProtocolError("generate: empty candidate text");
                out.push_back(std::move(g));
            }
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("generate: malformed response: ") + e.what());
        }
        detail::sort_and_truncate(out, n);
        return out;
    }

    std::vector<double> classify(const std::string& prompt, const std::vector<std::string>& labels) const override {
        detail::check_classify_args(labels);
        auto res = post("/v1/backend/classify", json{{"prompt", prompt}, {"labels", labels}});
        std::vector<double> probs;
        try {
            probs = res.at("probs").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("classify: malformed response: ") + e.what());
        }
        if (probs.size() != labels.size()) throw ProtocolError("classify: probs length does not match labels");
        return detail::normalize_masses(std::move(probs));
    }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override {
        detail::check_embed_args(texts);
        auto res = post("/v1/backend/embed", json{{"texts", texts}});
        std::vector<std::vector<double>> vecs;
        try {
            vecs = res.at("vectors").get<std::vector<std::vector<double>>>();
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("embed: malformed response: ") + e.what());
        }
        detail::check_vectors(vecs, texts.size());
        return vecs;
    }

    /// Reachable when the server answers any HTTP request.
    bool healthy() const override {
        auto cli = client();
        auto res = cli.Get(prefix_ + "/healthz");
        return static_cast<bool>(res);
    }

    std::string mode() const override { return "remote"; }

private:
    httplib::Client client() const {
        httplib::Client cli(host_);
        auto secs = timeout_ms_ / 1000;
        auto usecs = (timeout_ms_ % 1000) * 1000;
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        return cli;
    }

    json post(const std::string& path, const json& body) const {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{slots_};

        auto cli = client();
        auto res = cli.Post(prefix_ + path, body.dump(), "application/json");
        if (!res) throw TransportError("backend " + host_ + prefix_ + path + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw TransportError("backend " + path + " returned HTTP " + std::to_string(res->status));
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProtocolError(path + ": response is not JSON: " + e.what());
        }
    }

    std::string host_;
    std::string prefix_;
    int timeout_ms_;
    mutable std::counting_semaphore<> slots_;
};

// ---------------------------------------------------------------------------

enum class BackendMode { Fixture, Remote };

struct BackendDescriptor {
    BackendMode mode = BackendMode::Fixture;
    std::string fixture_path;
    std::string base_url;
    int timeout_ms = 30000;
    int max_in_flight = 8;
};

template <typename Json>
BackendDescriptor descriptor_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("backend must be an object");
    BackendDescriptor d;
    auto mode = j.value("mode", std::string("fixture"));
    if (mode == "fixture") {
        d.mode = BackendMode::Fixture;
    } else if (mode == "remote") {
        d.mode = BackendMode::Remote;
    } else {
        throw InvalidArgument("backend.mode must be 'fixture' or 'remote'");
    }
    d.fixture_path = j.value("fixture_path", std::string());
    d.base_url = j.value("base_url", std::string());
    d.timeout_ms = j.value("timeout_ms", d.timeout_ms);
    d.max_in_flight = j.value("max_in_flight", d.max_in_flight);
    return d;
}

inline void validate_descriptor(const BackendDescriptor& d) {
    if (d.mode == BackendMode::Fixture && (d.fixture_path.empty() || !d.base_url.empty()))
        throw InvalidArgument("fixture backend needs fixture_path and no base_url");
    if (d.mode == BackendMode::Remote && (d.base_url.empty() || !d.fixture_path.empty()))
        throw InvalidArgument("remote backend needs base_url and no fixture_path");
    if (d.timeout_ms < 1) throw InvalidArgument("backend.timeout_ms must be >= 1");
    if (d.max_in_flight < 1) throw InvalidArgument("backend.max_in_flight must be >= 1");
}

/// KALEIDO_BACKEND_URL, when set and non-empty, switches the descriptor to
/// remote mode at that URL.
inline BackendDescriptor apply_backend_env(BackendDescriptor d) {
    if (const char* url = std::getenv("KALEIDO_BACKEND_URL"); url && *url) {
        d.mode = BackendMode::Remote;
        d.base_url = url;
        d.fixture_path.clear();
    }
    return d;
}

inline std::shared_ptr<Backend> make_backend(const BackendDescriptor& d) {
    validate_descriptor(d);
    if (d.mode == BackendMode::Fixture) return FixtureBackend::from_file(d.fixture_path);
    return std::make_shared<RemoteBackend>(d.base_url, d.timeout_ms, d.max_in_flight);
}

}  // namespace kaleido
