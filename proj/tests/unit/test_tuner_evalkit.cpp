#include <gtest/gtest.h>

#include "kaleido/kaleido.hpp"
#include "test_support.hpp"

using namespace kaleido;
namespace kt = kaleido::testing;

namespace {

const std::vector<double> kFive{0.0, 0.25, 0.5, 0.75, 1.0};

ParamGrid two_axis_grid() {
    ParamGrid g;
    for (std::size_t i = 0; i < kNumTunedParams; ++i) g.values[i] = {0.5};
    g.values[0] = kFive;
    g.values[1] = kFive;
    return g;
}

SystemParams on_grid(const ParamGrid& g, std::size_t pick = 0) {
    SystemParams p;
    for (std::size_t i = 0; i < kNumTunedParams; ++i) coordinate(p, i) = g.values[i][std::min(pick, g.values[i].size() - 1)];
    return p;
}

double separable(const SystemParams& p) {
    const double x = p.relevance_threshold[0], y = p.relevance_threshold[1];
    return -(x - 0.5) * (x - 0.5) - (y - 0.25) * (y - 0.25);
}

void expect_trace_invariants(const TuneTrace& t, const Objective& f) {
    ASSERT_FALSE(t.visited.empty());
    double running = t.visited.front().objective;
    double mx = running;
    for (std::size_t i = 0; i < t.visited.size(); ++i) {
        if (i > 0) { EXPECT_GE(t.visited[i].best_so_far, t.visited[i - 1].best_so_far); }
        running = std::max(running, t.visited[i].objective);
        EXPECT_EQ(t.visited[i].best_so_far, running);
        mx = std::max(mx, t.visited[i].objective);
    }
    EXPECT_EQ(t.best_objective, mx);
    EXPECT_EQ(f(t.best_params), t.best_objective);
}

json two_action_fixture() {
    auto fx = kt::twelve_candidate_fixture();
    kt::FixtureBuilder extra;
    extra.j = fx;
    extra.candidate("Wearing a helmet", ValueKind::Value, "Safety", -0.1, 0.9375, {0.875, 0.0625, 0.0625}, {1, 0, 0, 0});
    return extra.j;
}

}  // namespace

TEST(GibbsTune, TemperatureZeroFindsSeparableOptimumWithinTwoSweeps) {
    auto g = two_axis_grid();
    auto init = on_grid(g, 0);
    for (int sweeps : {1, 2}) {
        auto t = gibbs_tune(g, init, sweeps, {0.0, 0.5}, 1, separable);
        EXPECT_EQ(t.best_params.relevance_threshold[0], 0.5);
        EXPECT_EQ(t.best_params.relevance_threshold[1], 0.25);
        EXPECT_EQ(t.best_objective, 0.0);
        expect_trace_invariants(t, separable);
    }
}

TEST(GibbsTune, ConstantObjective) {
    auto g = two_axis_grid();
    auto t = gibbs_tune(g, on_grid(g, 2), 3, {1.0, 0.5}, 9, [](const SystemParams&) { return 0.375; });
    EXPECT_EQ(t.best_objective, 0.375);
    EXPECT_TRUE(g.contains(t.best_params));
}

TEST(GibbsTune, SeededRandomRunsNeverLoseGround) {
    ParamGrid g;
    for (auto& v : g.values) v = kFive;
    std::array<double, kNumTunedParams> target{0.25, 0.5, 0.75, 1.0, 0.0, 0.5, 0.25};
    Objective f = [&](const SystemParams& p) {
        double s = 0;
        for (std::size_t i = 0; i < kNumTunedParams; ++i) s -= std::abs(coordinate(p, i) - target[i]);
        return s;
    };
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto init = on_grid(g, seed % 5);
        auto t = gibbs_tune(g, init, 3, {0.5, 0.5}, seed, f);
        EXPECT_GE(t.best_objective, f(init));
        expect_trace_invariants(t, f);
        auto again = gibbs_tune(g, init, 3, {0.5, 0.5}, seed, f);
        ASSERT_EQ(again.visited.size(), t.visited.size());
        EXPECT_EQ(to_json(again).dump(), to_json(t).dump());
    }
    // last sweep runs at temperature 0, so a unimodal separable target is reached
    auto t = gibbs_tune(g, on_grid(g, 4), 3, {0.5, 0.5}, 3, f);
    EXPECT_EQ(t.best_objective, 0.0);
}

TEST(GibbsTune, RejectsBadInput) {
    auto g = two_axis_grid();
    SystemParams off = on_grid(g);
    off.relevance_threshold[0] = 0.3;
    EXPECT_THROW(gibbs_tune(g, off, 1, {}, 0, separable), InvalidArgument);
    ParamGrid unsorted = g;
    unsorted.values[0] = {0.5, 0.25};
    EXPECT_THROW(unsorted.validate(), InvalidArgument);
    EXPECT_THROW(grid_from_json(json::parse(R"({"ngram_threshold":[0.05]})")), std::exception);
}

TEST(GibbsTune, GridJsonAndSnap) {
    auto g = grid_from_json(json::parse(R"({
        "relevance_threshold": {"Value": [0.7, 0.77], "Right": [0.82], "Duty": [0.9]},
        "embed_threshold": {"Value": [0.53], "Right": [0.6, 0.63], "Duty": [0.55]},
        "ngram_threshold": [0.05, 0.1]})"));
    EXPECT_TRUE(g.contains(published_params()));
    SystemParams p;
    p.relevance_threshold[0] = 0.72;
    EXPECT_EQ(g.snap(p).relevance_threshold[0], 0.7);
    EXPECT_EQ(params_to_json(g.snap(published_params())).dump(), params_to_json(published_params()).dump());
}

TEST(PipelineObjective, Examples) {
    FixtureBackend b(two_action_fixture());
    auto strict = published_params();
    strict.relevance_threshold = {1.0, 1.0, 1.0};
    std::vector<EvalItem> lie{{kt::kLieAction, {"Value: Honesty"}}};
    EXPECT_EQ(pipeline_objective(b, strict, lie), 0.0);

    auto exact = output_items(generate_values(b, kt::kLieAction, published_params()));
    std::vector<EvalItem> both{{kt::kLieAction, exact}, {"Wearing a helmet", {"Value: Public safety"}}};
    EXPECT_EQ(pipeline_objective(b, published_params(), {both[0]}), 1.0);
    // second action: LCS(value safety, value public safety) = 2 -> P 1, R 2/3, F1 0.8
    EXPECT_NEAR(pipeline_objective(b, published_params(), both), 0.9, 1e-12);
    EXPECT_THROW(pipeline_objective(b, published_params(), {}), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(LabelAccuracy, Examples) {
    EXPECT_EQ(label_accuracy(std::vector<int>{1, 0, 1}, {1, 0, 1}), 1.0);
    EXPECT_EQ(label_accuracy(std::vector<int>{1, 0, 1, 1}, {1, 1, 0, 1}), 0.5);
    EXPECT_THROW(label_accuracy(std::vector<int>{1}, {1, 0}), InvalidArgument);
    EXPECT_THROW(label_accuracy(std::vector<int>{}, {}), InvalidArgument);
}

TEST(GroupedAccuracy, Examples) {
    std::vector<int> gold(12, 1), pred(12, 1);
    EXPECT_EQ(grouped_accuracy(pred, gold), 1.0);
    pred[5] = 0;
    EXPECT_NEAR(grouped_accuracy(pred, gold), 2.0 / 3.0, 1e-15);
    EXPECT_LE(grouped_accuracy(pred, gold), label_accuracy(pred, gold));
    EXPECT_THROW(grouped_accuracy(std::vector<int>(5, 1), std::vector<int>(5, 1)), InvalidArgument);
}

TEST(SetPrecisionRecall, Examples) {
    auto v = [](std::string t) { return make_entry(ValueKind::Value, std::move(t)); };
    auto d = [](std::string t) { return make_entry(ValueKind::Duty, std::move(t)); };
    auto pr = set_precision_recall({v("Alpha"), v("Beta")}, {v("Alpha"), v("Gamma")});
    EXPECT_EQ(pr.precision, 0.5);
    EXPECT_EQ(pr.recall, 0.5);
    pr = set_precision_recall({v("Alpha"), d("Duty to obey laws")}, {v("Alpha"), d("Duty to obey the law")});
    EXPECT_EQ(pr.precision, 1.0);
    EXPECT_EQ(pr.recall, 1.0);
    EXPECT_EQ(set_precision_recall({}, {}).precision, 1.0);
    EXPECT_EQ(set_precision_recall({}, {v("A")}).precision, 0.0);
    EXPECT_EQ(set_precision_recall({v("A")}, {}).recall, 0.0);
    // same text, different kind: no match
    EXPECT_EQ(set_precision_recall({v("Duty to obey")}, {d("Duty to obey")}).matches, 0u);
    // one-to-one: two generated near-copies share a single reference
    pr = set_precision_recall({v("Public safety"), v("Road safety")}, {v("Public safety")});
    EXPECT_EQ(pr.matches, 1u);
    EXPECT_EQ(pr.precision, 0.5);
}

TEST(PrSweep, MonotoneRecallAndDirectEvaluation) {
    FixtureBackend b(kt::twelve_candidate_fixture());
    std::vector<ActionReference> data{{kt::kLieAction,
                                       {make_entry(ValueKind::Value, "Honesty"), make_entry(ValueKind::Value, "Kindness"),
                                        make_entry(ValueKind::Duty, "Duty of loyalty"), make_entry(ValueKind::Right, "Right to truth")}}};
    std::vector<SystemParams> sweep;
    for (double t : {0.5, 0.9, 0.94, 0.97, 1.0}) {
        SystemParams p;
        p.relevance_threshold = {t, t, t};
        sweep.push_back(p);
    }
    auto pts = pr_sweep(b, data, sweep);
    ASSERT_EQ(pts.size(), sweep.size());
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LE(pts[i].recall, pts[i - 1].recall);
    EXPECT_EQ(pts.back().avg_output_count, 0.0);
    EXPECT_EQ(pts.back().precision, 0.0);
    auto direct = evaluate_params(b, data, sweep[1]);
    EXPECT_EQ(direct.precision, pts[1].precision);
    EXPECT_EQ(direct.recall, pts[1].recall);

    auto csv = pr_sweep_csv(pts);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "rel_value,rel_right,rel_duty,emb_value,emb_right,emb_duty,ngram,beam_count,precision,recall,avg_count");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
    EXPECT_THROW(pr_sweep(b, data, {}), InvalidArgument);
}
