#pragma once

// Overgenerate-then-filter system: generate B beams, score relevance, sort,
// then greedily keep items that clear their kind's relevance threshold and
// are not too similar (unigram overlap or embedding cosine) to an
// already-kept item of the same kind. Valence is scored for survivors only.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "kaleido/backend.hpp"
#include "kaleido/core.hpp"
#include "kaleido/prompt_codec.hpp"
#include "kaleido/textsim.hpp"

namespace kaleido {

inline const std::vector<std::string> kRelevanceLabels{"Yes", "No"};
inline const std::vector<std::string> kValenceLabels{"Supports", "Opposes", "Either"};

enum class DropReason { Parse, BelowThreshold, NgramDup, EmbedDup };

inline std::string_view to_string(DropReason r) {
    switch (r) {
    case DropReason::Parse: return "parse";
    case DropReason::BelowThreshold: return "below_threshold";
    case DropReason::NgramDup: return "ngram_dup";
    case DropReason::EmbedDup: return "embed_dup";
    }
    return "parse";
}

struct DroppedCandidate {
    std::string raw_text;                 // beam text as generated
    std::optional<ValueEntry> entry;      // absent for parse failures
    std::optional<double> relevance;      // absent for parse failures
    double beam_score = 0.0;
    DropReason reason = DropReason::Parse;
};

struct PipelineOutput {
    std::string action;
    std::vector<ScoredCandidate> candidates;
    std::vector<DroppedCandidate> dropped;
};

inline double score_relevance(const Backend& backend, const std::string& action, const ValueEntry& entry) {
    auto probs = backend.classify(encode_task(Task::Relevance, action, entry.kind, entry.text), kRelevanceLabels);
    return probs.at(0);
}

inline ValenceDistribution score_valence(const Backend& backend, const std::string& action, const ValueEntry& entry) {
    auto probs = backend.classify(encode_task(Task::Valence, action, entry.kind, entry.text), kValenceLabels);
    return normalize_distribution({probs.at(0), probs.at(1), probs.at(2)});
}

inline std::string explain(const Backend& backend, const std::string& action, const ValueEntry& entry) {
    auto beams = backend.generate(encode_task(Task::Explanation, action, entry.kind, entry.text), 1);
    if (beams.empty() || trim_view(beams.front().text).empty()) throw BackendError("empty explanation");
    return beams.front().text;
}

inline PipelineOutput generate_values(const Backend& backend, const std::string& action, const SystemParams& params) {
    if (auto err = validate_params(params)) throw InvalidArgument("invalid params: " + *err);

    PipelineOutput out;
    out.action = action;

    auto beams = backend.generate(encode_task(Task::Generate, action), params.beam_count);

    struct Scored {
        ValueEntry entry;
        std::string raw;
        double beam_score;
        double relevance;
    };
    std::vector<Scored> scored;
    for (const auto& b : beams) {
        try {
            auto [kind, text] = parse_generation_output(b.text);
            scored.push_back({make_entry(kind, std::move(text)), b.text, b.score, 0.0});
        } catch (const ParseError&) {
            out.dropped.push_back({b.text, std::nullopt, std::nullopt, b.score, DropReason::Parse});
        }
    }
    for (auto& s : scored) s.relevance = score_relevance(backend, action, s.entry);

    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.relevance != b.relevance) return a.relevance > b.relevance;
        if (a.beam_score != b.beam_score) return a.beam_score > b.beam_score;
        return a.entry.text < b.entry.text;
    });

    // Only items that pass their relevance threshold ever reach the
    // similarity check, so only those are embedded.
    std::vector<std::string> to_embed;
    for (const auto& s : scored)
        if (s.relevance >= params.relevance_for(s.entry.kind)) to_embed.push_back(s.entry.display());
    std::vector<std::vector<double>> vectors;
    if (!to_embed.empty()) {
        vectors = backend.embed(to_embed);
        detail::check_vectors(vectors, to_embed.size());
    }

    struct Kept {
        ValueEntry entry;
        std::size_t vec;
    };
    std::vector<Kept> kept_all;
    std::vector<std::pair<std::size_t, double>> survivors;  // index into scored, relevance
    std::size_t next_vec = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const auto& s = scored[i];
        const auto kind = s.entry.kind;
        if (s.relevance < params.relevance_for(kind)) {
            out.dropped.push_back({s.raw, s.entry, s.relevance, s.beam_score, DropReason::BelowThreshold});
            continue;
        }
        const auto vec = next_vec++;
        double max_overlap = 0.0, max_cos = 0.0;
        bool any_same_kind = false;
        for (const auto& k : kept_all) {
            if (k.entry.kind != kind) continue;
            any_same_kind = true;
            max_overlap = std::max(max_overlap, content_overlap(s.entry, k.entry));
            max_cos = std::max(max_cos, cosine(vectors[vec], vectors[k.vec]));
        }
        // nothing of this kind kept yet: the similarity test is vacuous, even at threshold 0
        if (any_same_kind && max_overlap >= params.ngram_threshold) {
            out.dropped.push_back({s.raw, s.entry, s.relevance, s.beam_score, DropReason::NgramDup});
        } else if (any_same_kind && max_cos >= params.embed_for(kind)) {
            out.dropped.push_back({s.raw, s.entry, s.relevance, s.beam_score, DropReason::EmbedDup});
        } else {
            kept_all.push_back({s.entry, vec});
            survivors.emplace_back(i, s.relevance);
        }
    }

    for (auto [i, rel] : survivors) {
        const auto& s = scored[i];
        out.candidates.push_back({s.entry, rel, score_valence(backend, action, s.entry), s.beam_score});
    }
    return out;
}

/// Candidate item strings "Kind: text" in output order.
inline std::vector<std::string> output_items(const PipelineOutput& out) {
    std::vector<std::string> items;
    items.reserve(out.candidates.size());
    for (const auto& c : out.candidates) items.push_back(c.entry.display());
    return items;
}

inline ordered_json to_json(const DroppedCandidate& d) {
    ordered_json j;
    j["kind"] = d.entry ? ordered_json(std::string(to_string(d.entry->kind))) : ordered_json(nullptr);
    j["text"] = d.entry ? d.entry->text : d.raw_text;
    j["relevance"] = d.relevance ? ordered_json(*d.relevance) : ordered_json(nullptr);
    j["beam_score"] = d.beam_score;
    j["reason"] = to_string(d.reason);
    return j;
}

inline ordered_json to_json(const PipelineOutput& out) {
    ordered_json j;
    j["action"] = out.action;
    j["candidates"] = ordered_json::array();
    for (const auto& c : out.candidates) j["candidates"].push_back(to_json(c));
    j["dropped"] = ordered_json::array();
    for (const auto& d : out.dropped) j["dropped"].push_back(to_json(d));
    return j;
}

/// Parses the JSON form back. Beam scores of kept candidates are not part of
/// the wire format and come back as 0.
template <typename Json>
PipelineOutput pipeline_output_from_json(const Json& j) {
    PipelineOutput out;
    out.action = j.at("action").template get<std::string>();
    for (const auto& c : j.at("candidates")) out.candidates.push_back(candidate_from_json(c));
    for (const auto& d : j.at("dropped")) {
        DroppedCandidate dc;
        auto reason = d.at("reason").template get<std::string>();
        bool found = false;
        for (auto r : {DropReason::Parse, DropReason::BelowThreshold, DropReason::NgramDup, DropReason::EmbedDup})
            if (to_string(r) == reason) {
                dc.reason = r;
                found = true;
            }
        if (!found) throw InvalidArgument("unknown drop reason " + reason);
        dc.beam_score = d.at("beam_score").template get<double>();
        if (d.at("kind").is_null()) {
            dc.raw_text = d.at("text").template get<std::string>();
        } else {
            auto kind = kind_from_string(d.at("kind").template get<std::string>());
            if (!kind) throw InvalidArgument("unknown kind");
            dc.entry = make_entry(*kind, d.at("text").template get<std::string>());
            dc.raw_text = dc.entry->display();
            dc.relevance = d.at("relevance").template get<double>();
        }
        out.dropped.push_back(std::move(dc));
    }
    return out;
}

}  // namespace kaleido
