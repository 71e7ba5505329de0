#pragma once

// Model-backend contract and the deterministic fixture implementation.

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kaleido/core.hpp"

namespace kaleido {

struct GenerationCandidate {
    std::string text;
    double score = 0.0;  // higher is better
};

class Backend {
public:
    virtual ~Backend() = default;

    /// At most n candidates, sorted by score descending.
    virtual std::vector<GenerationCandidate> generate(const std::string& prompt, int n) const = 0;
    /// Probability vector aligned with labels, normalized over the label set.
    virtual std::vector<double> classify(const std::string& prompt, const std::vector<std::string>& labels) const = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;

    virtual bool healthy() const = 0;
    virtual std::string mode() const = 0;
};

namespace detail {

inline void check_generate_args(int n) {
    if (n < 1) throw InvalidArgument("generate: n must be >= 1");
}

inline void check_classify_args(const std::vector<std::string>& labels) {
    if (labels.empty()) throw InvalidArgument("classify: labels must be non-empty");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw InvalidArgument("classify: labels must be distinct");
}

inline void check_embed_args(const std::vector<std::string>& texts) {
    if (texts.empty()) throw InvalidArgument("embed: texts must be non-empty");
}

inline void sort_and_truncate(std::vector<GenerationCandidate>& c, int n) {
    std::stable_sort(c.begin(), c.end(),
                     [](const GenerationCandidate& a, const GenerationCandidate& b) { return a.score > b.score; });
    if (c.size() > static_cast<std::size_t>(n)) c.resize(static_cast<std::size_t>(n));
}

inline std::vector<double> normalize_masses(std::vector<double> m) {
    double total = 0.0;
    for (double x : m) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ProtocolError("classify: masses must be finite and non-negative");
        total += x;
    }
    if (total <= 0.0) throw ProtocolError("classify: zero mass over the requested labels");
    for (double& x : m) x /= total;
    return m;
}

inline void check_vectors(const std::vector<std::vector<double>>& v, std::size_t expected) {
    if (v.size() != expected) throw ProtocolError("embed: expected " + std::to_string(expected) + " vectors, got " + std::to_string(v.size()));
    if (v.empty()) return;
    const auto dim = v.front().size();
    if (dim == 0) throw ProtocolError("embed: vectors must have dimension >= 1");
    for (const auto& x : v)
        if (x.size() != dim) throw ProtocolError("embed: dimension mismatch across vectors");
}

}  // namespace detail

/// Serves canned responses keyed by exact prompt/text. Read-only after load,
/// so concurrent calls are safe. Unknown keys are a hard error.
///
/// File layout:
///   {"generate": {prompt: [{"text": str, "score": num}, ...]},
///    "classify": {prompt: {label: raw_mass, ...}},
///    "embed":    {text: [num, ...]}}
class FixtureBackend final : public Backend {
public:
    explicit FixtureBackend(const json& j) {
        if (!j.is_object()) throw InvalidArgument("fixture must be a JSON object");
        if (j.contains("generate")) {
            for (const auto& [prompt, beams] : j.at("generate").items()) {
                auto& out = generate_[prompt];
                for (const auto& b : beams) {
                    GenerationCandidate c{b.at("text").get<std::string>(), b.value("score", 0.0)};
                    if (c.text.empty()) throw InvalidArgument("fixture beam text must be non-empty");
                    out.push_back(std::move(c));
                }
            }
        }
        if (j.contains("classify")) {
            for (const auto& [prompt, masses] : j.at("classify").items()) {
                auto& out = classify_[prompt];
                for (const auto& [label, mass] : masses.items()) out[label] = mass.get<double>();
            }
        }
        if (j.contains("embed")) {
            for (const auto& [text, vec] : j.at("embed").items()) {
                auto v = vec.get<std::vector<double>>();
                if (v.empty()) throw InvalidArgument("fixture embedding for '" + text + "' is empty");
                if (dim_ && v.size() != dim_) throw InvalidArgument("fixture embeddings disagree in dimension");
                dim_ = v.size();
                embed_.emplace(text, std::move(v));
            }
        }
    }

    static std::shared_ptr<FixtureBackend> from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open fixture file " + path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError("fixture " + path + ": " + e.what());
        }
        return std::make_shared<FixtureBackend>(j);
    }

    std::vector<GenerationCandidate> generate(const std::string& prompt, int n) const override {
        detail::check_generate_args(n);
        auto it = generate_.find(prompt);
        if (it == generate_.end()) throw FixtureMiss("no fixture for prompt: " + prompt);
        auto out = it->second;
        detail::sort_and_truncate(out, n);
        return out;
    }

    std::vector<double> classify(const std::string& prompt, const std::vector<std::string>& labels) const override {
        detail::check_classify_args(labels);
        auto it = classify_.find(prompt);
        if (it == classify_.end()) throw FixtureMiss("no fixture for prompt: " + prompt);
        std::vector<double> masses;
        masses.reserve(labels.size());
        for (const auto& l : labels) {
            auto m = it->second.find(l);
            masses.push_back(m == it->second.end() ? 0.0 : m->second);
        }
        return detail::normalize_masses(std::move(masses));
    }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override {
        detail::check_embed_args(texts);
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& t : texts) {
            auto it = embed_.find(t);
            if (it == embed_.end()) throw FixtureMiss("no fixture embedding for text: " + t);
            out.push_back(it->second);
        }
        return out;
    }

    bool healthy() const override { return true; }
    std::string mode() const override { return "fixture"; }

private:
    std::map<std::string, std::vector<GenerationCandidate>> generate_;
    std::map<std::string, std::map<std::string, double>> classify_;
    std::map<std::string, std::vector<double>> embed_;
    std::size_t dim_ = 0;
};

}  // namespace kaleido
