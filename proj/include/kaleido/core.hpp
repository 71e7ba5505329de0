#pragma once

// Domain types shared by every kaleido module.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace kaleido {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Backend failures. TransportError covers unreachable servers and timeouts,
// ProtocolError a malformed or contract-violating response.
class BackendError : public Error {
public:
    using Error::Error;
};
class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};
class FixtureMiss : public BackendError {
public:
    using BackendError::BackendError;
};

inline constexpr double kProbTolerance = 1e-9;

// ---------------------------------------------------------------------------
// String helpers

inline std::string_view trim_view(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) { return to_lower(a) == to_lower(b); }

// ---------------------------------------------------------------------------
// ValueKind

enum class ValueKind { Value, Right, Duty };

inline constexpr std::array<ValueKind, 3> kAllKinds{ValueKind::Value, ValueKind::Right, ValueKind::Duty};

inline std::string_view to_string(ValueKind k) {
    switch (k) {
    case ValueKind::Value: return "Value";
    case ValueKind::Right: return "Right";
    case ValueKind::Duty: return "Duty";
    }
    return "Value";
}

inline std::optional<ValueKind> kind_from_string(std::string_view s) {
    for (auto k : kAllKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline std::size_t kind_index(ValueKind k) { return static_cast<std::size_t>(k); }

// ---------------------------------------------------------------------------
// Valence

// Canonical class order everywhere: support, oppose, either.
enum class ValenceLabel { Supports = 0, Opposes = 1, Either = 2 };

inline std::string_view to_string(ValenceLabel v) {
    switch (v) {
    case ValenceLabel::Supports: return "Supports";
    case ValenceLabel::Opposes: return "Opposes";
    case ValenceLabel::Either: return "Either";
    }
    return "Either";
}

inline std::optional<ValenceLabel> valence_from_string(std::string_view s) {
    auto t = to_lower(trim_view(s));
    if (t == "supports") return ValenceLabel::Supports;
    if (t == "opposes") return ValenceLabel::Opposes;
    if (t == "either") return ValenceLabel::Either;
    return std::nullopt;
}

struct ValenceDistribution {
    double support = 1.0 / 3.0;
    double oppose = 1.0 / 3.0;
    double either = 1.0 / 3.0;

    double operator[](std::size_t i) const { return i == 0 ? support : i == 1 ? oppose : either; }
    std::array<double, 3> as_array() const { return {support, oppose, either}; }

    ValenceLabel argmax() const {
        // ties resolve to the earlier class in canonical order
        if (support >= oppose && support >= either) return ValenceLabel::Supports;
        if (oppose >= either) return ValenceLabel::Opposes;
        return ValenceLabel::Either;
    }

    bool valid() const {
        for (double p : as_array())
            if (!(p >= 0.0 && p <= 1.0)) return false;
        return std::abs(support + oppose + either - 1.0) <= kProbTolerance;
    }

    friend bool operator==(const ValenceDistribution&, const ValenceDistribution&) = default;
};

/// Normalizes three non-negative masses into a distribution. Throws on an
/// all-zero or negative input.
inline ValenceDistribution normalize_distribution(const std::array<double, 3>& raw) {
    double total = 0.0;
    for (double x : raw) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("distribution masses must be finite and non-negative");
        total += x;
    }
    if (total <= 0.0) throw InvalidArgument("degenerate distribution");
    return {raw[0] / total, raw[1] / total, raw[2] / total};
}

// ---------------------------------------------------------------------------
// Entries and candidates

struct ValueEntry {
    ValueKind kind = ValueKind::Value;
    std::string text;
    std::optional<std::string> explanation;
    std::optional<ValenceLabel> valence_label;

    /// "Kind: text", the generation target form.
    std::string display() const { return std::string(to_string(kind)) + ": " + text; }

    friend bool operator==(const ValueEntry&, const ValueEntry&) = default;
};

inline ValueEntry make_entry(ValueKind kind, std::string text) {
    if (trim_view(text).empty()) throw InvalidArgument("entry text must be non-empty");
    return ValueEntry{kind, std::move(text), std::nullopt, std::nullopt};
}

struct ScoredCandidate {
    ValueEntry entry;
    double relevance = 0.0;
    ValenceDistribution valence;
    double beam_score = 0.0;
};

// ---------------------------------------------------------------------------
// SystemParams

template <typename T>
using PerKind = std::array<T, 3>;

struct SystemParams {
    PerKind<double> relevance_threshold{0.77, 0.82, 0.9};
    PerKind<double> embed_threshold{0.53, 0.63, 0.55};
    double ngram_threshold = 0.05;
    int beam_count = 100;

    double relevance_for(ValueKind k) const { return relevance_threshold[kind_index(k)]; }
    double embed_for(ValueKind k) const { return embed_threshold[kind_index(k)]; }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// The published system parameters (B = 100 beams).
inline SystemParams published_params() { return SystemParams{}; }

/// Returns the first violated constraint, or nullopt when the params are valid.
inline std::optional<std::string> validate_params(const SystemParams& p) {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    for (auto k : kAllKinds)
        if (!in_unit(p.relevance_for(k)))
            return "relevance_threshold." + std::string(to_string(k)) + " must lie in [0,1]";
    for (auto k : kAllKinds)
        if (!in_unit(p.embed_for(k)))
            return "embed_threshold." + std::string(to_string(k)) + " must lie in [0,1]";
    if (!in_unit(p.ngram_threshold)) return "ngram_threshold must lie in [0,1]";
    if (p.beam_count < 1) return "beam_count must be >= 1";
    return std::nullopt;
}

inline ordered_json params_to_json(const SystemParams& p) {
    ordered_json j;
    auto per_kind = [](const PerKind<double>& v) {
        ordered_json o;
        for (auto k : kAllKinds) o[std::string(to_string(k))] = v[kind_index(k)];
        return o;
    };
    j["relevance_threshold"] = per_kind(p.relevance_threshold);
    j["embed_threshold"] = per_kind(p.embed_threshold);
    j["ngram_threshold"] = p.ngram_threshold;
    j["beam_count"] = p.beam_count;
    return j;
}

/// Parses SystemParams JSON. Missing keys keep the published defaults; present
/// keys must be well-typed and per-kind maps must carry all three kinds.
/// The result is not range-checked; call validate_params.
template <typename Json>
SystemParams params_from_json(const Json& j, SystemParams base = published_params()) {
    if (!j.is_object()) throw InvalidArgument("params must be a JSON object");
    auto number = [](const Json& v, const std::string& key) {
        if (!v.is_number()) throw InvalidArgument(key + " must be a number");
        return v.template get<double>();
    };
    auto per_kind = [&](const char* key, PerKind<double>& out) {
        if (!j.contains(key)) return;
        const auto& o = j.at(key);
        if (!o.is_object()) throw InvalidArgument(std::string(key) + " must be an object keyed by kind");
        for (auto k : kAllKinds) {
            auto name = std::string(to_string(k));
            if (!o.contains(name)) throw InvalidArgument(std::string(key) + " is missing " + name);
            out[kind_index(k)] = number(o.at(name), std::string(key) + "." + name);
        }
    };
    per_kind("relevance_threshold", base.relevance_threshold);
    per_kind("embed_threshold", base.embed_threshold);
    if (j.contains("ngram_threshold")) base.ngram_threshold = number(j.at("ngram_threshold"), "ngram_threshold");
    if (j.contains("beam_count")) {
        const auto& b = j.at("beam_count");
        if (!b.is_number_integer()) throw InvalidArgument("beam_count must be an integer");
        base.beam_count = b.template get<int>();
    }
    return base;
}

// ---------------------------------------------------------------------------
// JSON helpers for shared types

inline ordered_json to_json(const ValenceDistribution& d) {
    ordered_json j;
    j["support"] = d.support;
    j["oppose"] = d.oppose;
    j["either"] = d.either;
    return j;
}

template <typename Json>
ValenceDistribution valence_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("valence must be an object");
    ValenceDistribution d{j.at("support").template get<double>(), j.at("oppose").template get<double>(),
                          j.at("either").template get<double>()};
    if (!d.valid()) throw InvalidArgument("valence must be a probability distribution");
    return d;
}

inline ordered_json to_json(const ScoredCandidate& c) {
    ordered_json j;
    j["kind"] = to_string(c.entry.kind);
    j["text"] = c.entry.text;
    j["relevance"] = c.relevance;
    j["valence"] = to_json(c.valence);
    return j;
}

template <typename Json>
ScoredCandidate candidate_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("candidate must be an object");
    auto kind = kind_from_string(j.at("kind").template get<std::string>());
    if (!kind) throw InvalidArgument("unknown kind");
    ScoredCandidate c;
    c.entry = make_entry(*kind, j.at("text").template get<std::string>());
    c.relevance = j.at("relevance").template get<double>();
    if (!(c.relevance >= 0.0 && c.relevance <= 1.0)) throw InvalidArgument("relevance must lie in [0,1]");
    c.valence = valence_from_json(j.at("valence"));
    return c;
}

}  // namespace kaleido
