#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <tuple>
#include <vector>

#include "kaleido/backend.hpp"
#include "kaleido/core.hpp"
#include "kaleido/pipeline.hpp"
#include "kaleido/textsim.hpp"

namespace kaleido {

template <typename T>
double label_accuracy(const std::vector<T>& predictions, const std::vector<T>& golds) {
    if (predictions.size() != golds.size()) throw InvalidArgument("label_accuracy: length mismatch");
    if (predictions.empty()) throw InvalidArgument("label_accuracy: empty input");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) hit += predictions[i] == golds[i];
    return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

/// Fraction of consecutive groups whose every element is correct.
template <typename T>
double grouped_accuracy(const std::vector<T>& predictions, const std::vector<T>& golds, std::size_t group_size = 4) {
    if (predictions.size() != golds.size()) throw InvalidArgument("grouped_accuracy: length mismatch");
    if (group_size == 0 || predictions.empty() || predictions.size() % group_size != 0)
        throw InvalidArgument("grouped_accuracy: length must be a non-zero multiple of group_size");
    std::size_t groups = predictions.size() / group_size, ok = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        bool all = true;
        for (std::size_t i = g * group_size; i < (g + 1) * group_size; ++i) all = all && predictions[i] == golds[i];
        ok += all;
    }
    return static_cast<double>(ok) / static_cast<double>(groups);
}

inline constexpr double kSetMatchThreshold = 0.5;

struct SetPR {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t matches = 0;
};

/// Greedy one-to-one matching of same-kind items whose texts reach Rouge-1
/// F1 >= 0.5, best pairs first (ties by generated index, then reference
/// index). Empty-vs-empty scores (1,1); empty-vs-nonempty scores 0.
inline SetPR set_precision_recall(const std::vector<ValueEntry>& generated, const std::vector<ValueEntry>& reference) {
    if (generated.empty() && reference.empty()) return {1.0, 1.0, 0};
    if (generated.empty() || reference.empty()) return {0.0, 0.0, 0};

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t g = 0; g < generated.size(); ++g)
        for (std::size_t r = 0; r < reference.size(); ++r) {
            if (generated[g].kind != reference[r].kind) continue;
            double f1 = rouge_n(generated[g].text, reference[r].text, 1).f1;
            if (f1 >= kSetMatchThreshold) pairs.emplace_back(f1, g, r);
        }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::make_pair(std::get<1>(a), std::get<2>(a)) < std::make_pair(std::get<1>(b), std::get<2>(b));
    });
    std::vector<bool> g_used(generated.size()), r_used(reference.size());
    std::size_t matches = 0;
    for (const auto& [f1, g, r] : pairs) {
        if (g_used[g] || r_used[r]) continue;
        g_used[g] = r_used[r] = true;
        ++matches;
    }
    return {static_cast<double>(matches) / static_cast<double>(generated.size()),
            static_cast<double>(matches) / static_cast<double>(reference.size()), matches};
}

struct ActionReference {
    std::string action;
    std::vector<ValueEntry> reference;
};

struct PRPoint {
    SystemParams params;
    double precision = 0.0;
    double recall = 0.0;
    double avg_output_count = 0.0;
};

inline PRPoint evaluate_params(const Backend& backend, const std::vector<ActionReference>& data, const SystemParams& params) {
    if (data.empty()) throw InvalidArgument("pr_sweep: no actions");
    PRPoint pt{params, 0.0, 0.0, 0.0};
    for (const auto& item : data) {
        auto out = generate_values(backend, item.action, params);
        std::vector<ValueEntry> gen;
        for (const auto& c : out.candidates) gen.push_back(c.entry);
        auto pr = set_precision_recall(gen, item.reference);
        pt.precision += pr.precision;
        pt.recall += pr.recall;
        pt.avg_output_count += static_cast<double>(gen.size());
    }
    const auto n = static_cast<double>(data.size());
    pt.precision /= n;
    pt.recall /= n;
    pt.avg_output_count /= n;
    return pt;
}

inline std::vector<PRPoint> pr_sweep(const Backend& backend, const std::vector<ActionReference>& data,
                                     const std::vector<SystemParams>& sweep) {
    if (sweep.empty()) throw InvalidArgument("pr_sweep: no parameter settings");
    std::vector<PRPoint> out;
    out.reserve(sweep.size());
    for (const auto& p : sweep) out.push_back(evaluate_params(backend, data, p));
    return out;
}

inline std::string pr_sweep_csv(const std::vector<PRPoint>& points) {
    std::string out =
        "rel_value,rel_right,rel_duty,emb_value,emb_right,emb_duty,ngram,beam_count,precision,recall,avg_count\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& p : points) {
        const auto& s = p.params;
        for (double x : s.relevance_threshold) out += num(x) + ',';
        for (double x : s.embed_threshold) out += num(x) + ',';
        out += num(s.ngram_threshold) + ',' + std::to_string(s.beam_count) + ',';
        out += num(p.precision) + ',' + num(p.recall) + ',' + num(p.avg_output_count) + '\n';
    }
    return out;
}

}  // namespace kaleido
