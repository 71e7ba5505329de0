#pragma once

// Judgment aggregation over scored candidates.
//
// Per-class mass is sum_i w_i * relevance_i * valence_i[class]; in binary
// mode the either class is zeroed before normalization. Entropy is in nats.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "kaleido/core.hpp"

namespace kaleido {

/// Candidate index -> weight in [0,1]. Missing indices weigh 1.
struct WeightOverrides {
    std::map<std::size_t, double> weights;

    double at(std::size_t i) const {
        auto it = weights.find(i);
        return it == weights.end() ? 1.0 : it->second;
    }
};

struct Contribution {
    std::size_t index = 0;
    std::array<double, 3> mass{};
};

struct DecisionResult {
    ValenceDistribution distribution;
    double entropy_nats = 0.0;
    std::vector<Contribution> contributions;
};

inline double entropy(const ValenceDistribution& d) {
    double h = 0.0;
    for (double p : d.as_array())
        if (p > 0.0) h -= p * std::log(p);
    return std::max(0.0, h);
}

inline DecisionResult decide(const std::vector<ScoredCandidate>& candidates, const WeightOverrides& weights = {},
                             bool binary = false) {
    if (candidates.empty()) throw InvalidArgument("no effective evidence");
    for (const auto& [i, w] : weights.weights) {
        if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("weights must lie in [0,1]");
        if (i >= candidates.size()) throw InvalidArgument("weight index " + std::to_string(i) + " out of range");
    }
    DecisionResult r;
    std::array<double, 3> total{};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const double scale = weights.at(i) * c.relevance;
        Contribution contrib{i, {scale * c.valence.support, scale * c.valence.oppose, binary ? 0.0 : scale * c.valence.either}};
        for (std::size_t k = 0; k < 3; ++k) total[k] += contrib.mass[k];
        r.contributions.push_back(contrib);
    }
    if (total[0] + total[1] + total[2] <= 0.0) throw InvalidArgument("no effective evidence");
    r.distribution = normalize_distribution(total);
    r.entropy_nats = entropy(r.distribution);
    return r;
}

inline ordered_json to_json(const DecisionResult& r) {
    ordered_json j;
    j["distribution"] = to_json(r.distribution);
    j["entropy"] = r.entropy_nats;
    j["contributions"] = ordered_json::array();
    for (const auto& c : r.contributions) {
        ordered_json cj;
        cj["index"] = c.index;
        cj["mass"] = {c.mass[0], c.mass[1], c.mass[2]};
        j["contributions"].push_back(cj);
    }
    return j;
}

template <typename Json>
DecisionResult decision_from_json(const Json& j) {
    DecisionResult r;
    r.distribution = valence_from_json(j.at("distribution"));
    r.entropy_nats = j.at("entropy").template get<double>();
    for (const auto& c : j.at("contributions")) {
        Contribution contrib;
        contrib.index = c.at("index").template get<std::size_t>();
        auto m = c.at("mass").template get<std::vector<double>>();
        if (m.size() != 3) throw InvalidArgument("contribution mass must have 3 entries");
        contrib.mass = {m[0], m[1], m[2]};
        r.contributions.push_back(contrib);
    }
    return r;
}

/// Weights as {"<index>": w, ...} or an array aligned with the candidates.
template <typename Json>
WeightOverrides weights_from_json(const Json& j) {
    WeightOverrides w;
    auto read = [](const Json& v) {
        if (!v.is_number()) throw InvalidArgument("weights must be numbers");
        auto x = v.template get<double>();
        if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("weights must lie in [0,1]");
        return x;
    };
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) w.weights[i] = read(j[i]);
    } else if (j.is_object()) {
        for (const auto& [key, v] : j.items()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw InvalidArgument("weight key '" + key + "' is not a candidate index");
            }
            w.weights[idx] = read(v);
        }
    } else if (!j.is_null()) {
        throw InvalidArgument("weights must be an object or array");
    }
    return w;
}

// ---------------------------------------------------------------------------
// Entropy threshold fitting

struct EntropyThreshold {
    double tau = 0.0;
    double achieved_f1 = 0.0;
};

struct LabeledEntropy {
    double entropy = 0.0;
    bool positive = false;  // ambiguous / controversial
};

/// F1 of the rule "entropy >= tau -> positive".
inline double threshold_f1(const std::vector<LabeledEntropy>& samples, double tau) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& s : samples) {
        bool pred = s.entropy >= tau;
        if (pred && s.positive) ++tp;
        else if (pred) ++fp;
        else if (s.positive) ++fn;
    }
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

/// Scans the midpoints between consecutive distinct entropies plus one
/// sentinel below the minimum and one above the maximum. Ties go to the
/// smaller tau.
inline EntropyThreshold fit_threshold(const std::vector<LabeledEntropy>& samples) {
    bool any_pos = false, any_neg = false;
    std::vector<double> values;
    for (const auto& s : samples) {
        if (!(s.entropy >= 0.0) || !std::isfinite(s.entropy)) throw InvalidArgument("entropies must be finite and non-negative");
        (s.positive ? any_pos : any_neg) = true;
        values.push_back(s.entropy);
    }
    if (!any_pos || !any_neg) throw InvalidArgument("fit_threshold needs both positive and negative samples");
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<double> taus;
    taus.push_back(std::max(0.0, values.front() - 1.0));
    for (std::size_t i = 1; i < values.size(); ++i) taus.push_back((values[i - 1] + values[i]) / 2.0);
    taus.push_back(values.back() + 1.0);

    EntropyThreshold best{taus.front(), threshold_f1(samples, taus.front())};
    for (std::size_t i = 1; i < taus.size(); ++i) {
        double f1 = threshold_f1(samples, taus[i]);
        if (f1 > best.achieved_f1) best = {taus[i], f1};
    }
    return best;
}

inline ordered_json to_json(const EntropyThreshold& t) {
    ordered_json j;
    j["tau"] = t.tau;
    j["achieved_f1"] = t.achieved_f1;
    return j;
}

template <typename Json>
EntropyThreshold entropy_threshold_from_json(const Json& j) {
    return {j.at("tau").template get<double>(), j.at("achieved_f1").template get<double>()};
}

// ---------------------------------------------------------------------------
// Calibration: multinomial logistic regression over (p_support, p_oppose, p_either)

struct CalibrationModel {
    std::vector<std::array<double, 3>> weights;  // one row per class
    std::vector<double> bias;

    std::size_t num_classes() const { return bias.size(); }

    std::vector<double> scores(const ValenceDistribution& x) const {
        std::vector<double> s(num_classes());
        for (std::size_t c = 0; c < num_classes(); ++c)
            s[c] = bias[c] + weights[c][0] * x.support + weights[c][1] * x.oppose + weights[c][2] * x.either;
        return s;
    }

    /// Argmax class; ties resolve to the lower class id.
    int predict(const ValenceDistribution& x) const {
        auto s = scores(x);
        return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
    }
};

/// Full-batch gradient descent on the mean softmax cross-entropy, starting
/// from zero parameters. The class count is max(label) + 1.
inline CalibrationModel calibrate(const std::vector<ValenceDistribution>& features, const std::vector<int>& labels,
                                  int iterations = 2000, double learning_rate = 0.5) {
    if (features.size() != labels.size()) throw InvalidArgument("calibrate: features and labels differ in length");
    if (features.empty()) throw InvalidArgument("calibrate: empty training set");
    if (iterations < 0 || !(learning_rate > 0.0)) throw InvalidArgument("calibrate: bad optimizer settings");
    int max_label = 0;
    std::map<int, int> seen;
    for (int l : labels) {
        if (l < 0) throw InvalidArgument("calibrate: labels must be non-negative class ids");
        max_label = std::max(max_label, l);
        ++seen[l];
    }
    if (seen.size() < 2) throw InvalidArgument("calibrate: at least two classes must be present");

    const auto k = static_cast<std::size_t>(max_label) + 1;
    const auto n = static_cast<double>(features.size());
    CalibrationModel m{std::vector<std::array<double, 3>>(k, {0.0, 0.0, 0.0}), std::vector<double>(k, 0.0)};

    std::vector<std::array<double, 3>> gw(k);
    std::vector<double> gb(k);
    std::vector<double> prob(k);
    for (int it = 0; it < iterations; ++it) {
        std::fill(gw.begin(), gw.end(), std::array<double, 3>{0.0, 0.0, 0.0});
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t i = 0; i < features.size(); ++i) {
            auto s = m.scores(features[i]);
            double mx = *std::max_element(s.begin(), s.end());
            double z = 0.0;
            for (std::size_t c = 0; c < k; ++c) z += prob[c] = std::exp(s[c] - mx);
            const auto x = features[i].as_array();
            for (std::size_t c = 0; c < k; ++c) {
                double err = prob[c] / z - (static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0);
                gb[c] += err;
                for (std::size_t f = 0; f < 3; ++f) gw[c][f] += err * x[f];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            m.bias[c] -= learning_rate * gb[c] / n;
            for (std::size_t f = 0; f < 3; ++f) m.weights[c][f] -= learning_rate * gw[c][f] / n;
        }
    }
    return m;
}

inline ordered_json to_json(const CalibrationModel& m) {
    ordered_json j;
    j["weights"] = ordered_json::array();
    for (const auto& w : m.weights) j["weights"].push_back({w[0], w[1], w[2]});
    j["bias"] = m.bias;
    return j;
}

template <typename Json>
CalibrationModel calibration_from_json(const Json& j) {
    CalibrationModel m;
    for (const auto& row : j.at("weights")) {
        auto w = row.template get<std::vector<double>>();
        if (w.size() != 3) throw InvalidArgument("calibration weight rows must have 3 entries");
        m.weights.push_back({w[0], w[1], w[2]});
    }
    m.bias = j.at("bias").template get<std::vector<double>>();
    if (m.bias.size() != m.weights.size() || m.bias.empty()) throw InvalidArgument("calibration weights/bias mismatch");
    for (double b : m.bias)
        if (!std::isfinite(b)) throw InvalidArgument("calibration parameters must be finite");
    return m;
}

}  // namespace kaleido
