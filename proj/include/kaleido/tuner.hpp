#pragma once

// Grid-restricted Gibbs-style coordinate search over the seven threshold
// parameters. Each step evaluates the objective at every grid value of one
// coordinate (others fixed) and samples the next value with probability
// proportional to exp(objective / temperature). Temperature 0 is argmax,
// i.e. coordinate ascent.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kaleido/backend.hpp"
#include "kaleido/core.hpp"
#include "kaleido/pipeline.hpp"
#include "kaleido/random.hpp"
#include "kaleido/textsim.hpp"

namespace kaleido {

inline constexpr std::size_t kNumTunedParams = 7;

// Coordinate order: relevance V/R/D, embed V/R/D, ngram.
inline double& coordinate(SystemParams& p, std::size_t i) {
    if (i < 3) return p.relevance_threshold[i];
    if (i < 6) return p.embed_threshold[i - 3];
    return p.ngram_threshold;
}

inline double coordinate(const SystemParams& p, std::size_t i) {
    if (i < 3) return p.relevance_threshold[i];
    if (i < 6) return p.embed_threshold[i - 3];
    return p.ngram_threshold;
}

inline std::string coordinate_name(std::size_t i) {
    if (i < 3) return "relevance_threshold." + std::string(to_string(kAllKinds[i]));
    if (i < 6) return "embed_threshold." + std::string(to_string(kAllKinds[i - 3]));
    return "ngram_threshold";
}

struct ParamGrid {
    std::array<std::vector<double>, kNumTunedParams> values;

    void validate() const {
        for (std::size_t i = 0; i < kNumTunedParams; ++i) {
            const auto& v = values[i];
            if (v.empty()) throw InvalidArgument("grid for " + coordinate_name(i) + " is empty");
            if (!std::is_sorted(v.begin(), v.end())) throw InvalidArgument("grid for " + coordinate_name(i) + " is not sorted");
            for (double x : v)
                if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("grid for " + coordinate_name(i) + " leaves [0,1]");
        }
    }

    bool contains(const SystemParams& p) const {
        for (std::size_t i = 0; i < kNumTunedParams; ++i)
            if (std::find(values[i].begin(), values[i].end(), coordinate(p, i)) == values[i].end()) return false;
        return true;
    }

    /// Grid point closest to p in every coordinate (first on ties).
    SystemParams snap(SystemParams p) const {
        for (std::size_t i = 0; i < kNumTunedParams; ++i) {
            auto& x = coordinate(p, i);
            double best = values[i].front();
            for (double v : values[i])
                if (std::abs(v - x) < std::abs(best - x)) best = v;
            x = best;
        }
        return p;
    }
};

/// Grid JSON mirrors SystemParams: per-kind lists under "relevance_threshold"
/// and "embed_threshold", a list under "ngram_threshold".
template <typename Json>
ParamGrid grid_from_json(const Json& j) {
    ParamGrid g;
    for (std::size_t i = 0; i < kNumTunedParams; ++i) {
        const Json* node = nullptr;
        if (i < 6) {
            const auto& group = j.at(i < 3 ? "relevance_threshold" : "embed_threshold");
            node = &group.at(std::string(to_string(kAllKinds[i % 3])));
        } else {
            node = &j.at("ngram_threshold");
        }
        g.values[i] = node->template get<std::vector<double>>();
    }
    g.validate();
    return g;
}

struct TraceStep {
    SystemParams params;
    double objective = 0.0;
    double best_so_far = 0.0;
};

struct TuneTrace {
    std::vector<TraceStep> visited;
    SystemParams best_params;
    double best_objective = 0.0;
};

/// Temperature for sweep s: initial * decay^s, and exactly 0 on the last
/// sweep so the run ends with a greedy pass.
struct TemperatureSchedule {
    double initial = 0.0;
    double decay = 0.5;

    double at(int sweep, int sweeps) const {
        if (sweep >= sweeps - 1) return 0.0;
        return initial * std::pow(decay, sweep);
    }
};

using Objective = std::function<double(const SystemParams&)>;

inline TuneTrace gibbs_tune(const ParamGrid& grid, const SystemParams& init, int sweeps, TemperatureSchedule schedule,
                            std::uint64_t seed, const Objective& objective) {
    grid.validate();
    if (!grid.contains(init)) throw InvalidArgument("initial params do not lie on the grid");
    if (sweeps < 0) throw InvalidArgument("sweeps must be non-negative");
    if (!(schedule.initial >= 0.0) || !(schedule.decay >= 0.0)) throw InvalidArgument("temperatures must be non-negative");

    Rng rng(seed);
    TuneTrace trace;
    auto record = [&](const SystemParams& p, double obj) {
        if (trace.visited.empty() || obj > trace.best_objective) {
            trace.best_objective = obj;
            trace.best_params = p;
        }
        trace.visited.push_back({p, obj, trace.best_objective});
    };

    SystemParams current = init;
    record(current, objective(current));

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const double temp = schedule.at(sweep, sweeps);
        for (std::size_t c = 0; c < kNumTunedParams; ++c) {
            const auto& values = grid.values[c];
            if (values.size() == 1) continue;
            std::vector<double> scores(values.size());
            for (std::size_t v = 0; v < values.size(); ++v) {
                SystemParams cand = current;
                coordinate(cand, c) = values[v];
                scores[v] = objective(cand);
                record(cand, scores[v]);
            }
            std::size_t pick = 0;
            const double top = *std::max_element(scores.begin(), scores.end());
            if (temp <= 0.0) {
                pick = static_cast<std::size_t>(std::find(scores.begin(), scores.end(), top) - scores.begin());
            } else {
                std::vector<double> w(scores.size());
                double z = 0.0;
                for (std::size_t v = 0; v < scores.size(); ++v) z += w[v] = std::exp((scores[v] - top) / temp);
                double u = uniform_unit(rng) * z;
                pick = scores.size() - 1;
                for (std::size_t v = 0; v < scores.size(); ++v) {
                    if (u < w[v]) {
                        pick = v;
                        break;
                    }
                    u -= w[v];
                }
            }
            coordinate(current, c) = values[pick];
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Pipeline objective

struct EvalItem {
    std::string action;
    std::vector<std::string> references;  // "Kind: text"
};

/// Mean summary-level Rouge-L F1 of pipeline outputs against references.
inline double pipeline_objective(const Backend& backend, const SystemParams& params, const std::vector<EvalItem>& eval_set) {
    if (eval_set.empty()) throw InvalidArgument("objective: eval set is empty");
    double sum = 0.0;
    for (const auto& item : eval_set) {
        auto out = generate_values(backend, item.action, params);
        sum += rouge_l_sum(output_items(out), item.references).f1;
    }
    return sum / static_cast<double>(eval_set.size());
}

template <typename Json>
std::vector<EvalItem> eval_set_from_json(const Json& j) {
    std::vector<EvalItem> items;
    for (const auto& e : j) items.push_back({e.at("action").template get<std::string>(), e.at("references").template get<std::vector<std::string>>()});
    return items;
}

inline ordered_json to_json(const TuneTrace& t) {
    ordered_json j;
    j["best_objective"] = t.best_objective;
    j["best_params"] = params_to_json(t.best_params);
    j["visited"] = ordered_json::array();
    for (const auto& s : t.visited) {
        ordered_json sj;
        sj["params"] = params_to_json(s.params);
        sj["objective"] = s.objective;
        sj["best_so_far"] = s.best_so_far;
        j["visited"].push_back(sj);
    }
    return j;
}

}  // namespace kaleido
