// kaleido command-line entry point.
//
// Exit codes: 0 success, 1 runtime or backend failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kaleido/kaleido.hpp"

namespace fs = std::filesystem;
using namespace kaleido;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError(path + ": invalid JSON: " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

template <typename F>
auto as_usage(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(what + ": " + e.what());
    }
}

struct Globals {
    std::string config_path;
    std::string fixture;
    std::string backend_url;

    // flags > KALEIDO_BACKEND_URL > config file > defaults
    ServiceConfig config(bool allow_bind = false) const {
        ServiceConfig c;
        if (!config_path.empty())
            c = as_usage("config", [&] {
                return service_config_from_json(read_json(config_path), fs::path(config_path).parent_path(), allow_bind);
            });
        c.backend = apply_backend_env(c.backend);
        if (!fixture.empty()) {
            c.backend.mode = BackendMode::Fixture;
            c.backend.fixture_path = fixture;
            c.backend.base_url.clear();
        }
        if (!backend_url.empty()) {
            c.backend.mode = BackendMode::Remote;
            c.backend.base_url = backend_url;
            c.backend.fixture_path.clear();
        }
        if (c.backend.fixture_path.empty() && c.backend.base_url.empty())
            throw UsageError("no backend configured (use --fixture, --backend-url, --config or KALEIDO_BACKEND_URL)");
        as_usage("backend", [&] {
            validate_descriptor(c.backend);
            return 0;
        });
        return c;
    }

    std::shared_ptr<Backend> backend(const ServiceConfig& c) const { return make_backend(c.backend); }
};

std::string_view arrow(ValenceLabel v) {
    switch (v) {
    case ValenceLabel::Supports: return "↑";
    case ValenceLabel::Opposes: return "↓";
    case ValenceLabel::Either: return "↕";
    }
    return "";
}

std::string render_table(const PipelineOutput& out) {
    std::string s = out.action + " -->\n";
    bool first = true;
    for (auto kind : kAllKinds) {
        if (!first) s += '\n';
        first = false;
        s += kind == ValueKind::Value ? "Values:\n" : kind == ValueKind::Right ? "Rights:\n" : "Duties:\n";
        bool any = false;
        for (const auto& c : out.candidates) {
            if (c.entry.kind != kind) continue;
            any = true;
            auto v = c.valence.argmax();
            char buf[128];
            std::snprintf(buf, sizeof buf, " [%s] %s  relevance %.2f  (s %.2f / o %.2f / e %.2f)\n",
                          to_lower(to_string(v)).c_str(), std::string(arrow(v)).c_str(), c.relevance, c.valence.support,
                          c.valence.oppose, c.valence.either);
            s += "- " + c.entry.text + buf;
        }
        if (!any) s += "- N/A\n";
    }
    return s;
}

int cmd_values(const Globals& g, const std::string& action, const std::string& params_path, const std::string& format) {
    if (trim_view(action).empty()) throw UsageError("--action must be non-empty");
    auto cfg = g.config();
    SystemParams params = cfg.params;
    if (!params_path.empty()) {
        params = as_usage("params", [&] { return params_from_json(read_json(params_path), cfg.params); });
        if (auto err = validate_params(params)) throw UsageError("params: " + *err);
    }
    auto out = generate_values(*g.backend(cfg), action, params);
    if (format == "table") {
        std::cout << render_table(out);
    } else {
        std::cout << to_json(out).dump(2) << '\n';
    }
    return 0;
}

int cmd_decide(const std::string& in_path, const std::string& weights_path, bool binary) {
    auto j = read_json(in_path);
    auto [candidates, weights] = as_usage("decide input", [&] {
        const json& arr = j.is_object() && j.contains("candidates") ? j.at("candidates") : j;
        if (!arr.is_array()) throw InvalidArgument("expected a candidate array or an object with \"candidates\"");
        std::vector<ScoredCandidate> cs;
        for (const auto& c : arr) cs.push_back(candidate_from_json(c));
        WeightOverrides w;
        if (!weights_path.empty()) w = weights_from_json(read_json(weights_path));
        return std::make_pair(cs, w);
    });
    DecisionResult r;
    try {
        r = decide(candidates, weights, binary);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    std::cout << to_json(r).dump(2) << '\n';
    return 0;
}

int cmd_dataset_build(const std::string& raw, const std::string& out_dir, std::uint64_t seed) {
    auto records = parse_corpus_dir(raw);
    auto rows = build_subtasks(records, seed);
    auto split = split_by_situation(records, seed);
    fs::create_directories(out_dir);
    std::vector<SubtaskRecord> parts[3];
    for (auto& r : rows) parts[static_cast<int>(split.of[r.situation_id])].push_back(r);
    for (auto s : {Split::Train, Split::Val, Split::Test})
        write_file(fs::path(out_dir) / (std::string(to_string(s)) + ".jsonl"), to_jsonl(parts[static_cast<int>(s)]));
    write_file(fs::path(out_dir) / "stats.json", to_json(corpus_stats(records)).dump(2) + "\n");

    ordered_json summary;
    summary["situations"] = records.size();
    ordered_json by_task;
    for (auto t : {Task::Generate, Task::Relevance, Task::Valence, Task::Explanation}) {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.task == t;
        by_task[std::string(to_string(t))] = n;
    }
    summary["rows"] = by_task;
    ordered_json splits;
    for (auto s : {Split::Train, Split::Val, Split::Test}) splits[std::string(to_string(s))] = split.count(s);
    summary["splits"] = splits;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_dataset_stats(const std::string& raw) {
    std::cout << to_json(corpus_stats(parse_corpus_dir(raw))).dump(2) << '\n';
    return 0;
}

int cmd_tune(const Globals& g, const std::string& eval_path, const std::string& grid_path, int sweeps, std::uint64_t seed,
             const std::string& init_path, double t0, double decay, const std::string& out_dir) {
    auto eval = as_usage("eval set", [&] { return eval_set_from_json(read_json(eval_path)); });
    auto grid = as_usage("grid", [&] { return grid_from_json(read_json(grid_path)); });
    auto cfg = g.config();
    SystemParams init = init_path.empty() ? grid.snap(cfg.params)
                                          : as_usage("init", [&] { return params_from_json(read_json(init_path), cfg.params); });
    if (!grid.contains(init)) throw UsageError("initial params do not lie on the grid");
    auto backend = g.backend(cfg);
    auto trace = gibbs_tune(grid, init, sweeps, {t0, decay}, seed,
                            [&](const SystemParams& p) { return pipeline_objective(*backend, p, eval); });
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "trace.json", to_json(trace).dump(2) + "\n");
        write_file(fs::path(out_dir) / "best_params.json", params_to_json(trace.best_params).dump(2) + "\n");
    }
    ordered_json j;
    j["best_objective"] = trace.best_objective;
    j["best_params"] = params_to_json(trace.best_params);
    j["evaluations"] = trace.visited.size();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_eval_ethics(const Globals& g, const std::string& subset_name, const std::string& data, const std::string& out_path) {
    auto subset = ethics::subset_from_string(subset_name);
    if (!subset) throw UsageError("unknown subset '" + subset_name + "'");
    std::ifstream in(data);
    if (!in) throw UsageError("cannot read " + data);
    auto examples = ethics::read_examples(*subset, in);
    if (examples.empty()) throw Error("no examples in " + data);
    auto cfg = g.config();
    auto backend = g.backend(cfg);

    std::string jsonl;
    std::vector<int> pred, gold;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        auto p = ethics::predict(*backend, examples[i], i);
        jsonl += ethics::to_json(p, *subset).dump() + '\n';
        pred.push_back(p.predicted);
        gold.push_back(p.gold);
    }
    if (!out_path.empty()) write_file(out_path, jsonl);

    ordered_json summary;
    summary["subset"] = subset_name;
    summary["examples"] = examples.size();
    summary["accuracy"] = label_accuracy(pred, gold);
    if ((*subset == ethics::Subset::Justice || *subset == ethics::Subset::Deontology) && pred.size() % 4 == 0)
        summary["grouped_accuracy"] = grouped_accuracy(pred, gold, 4);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_serve(const Globals& g, int port) {
    auto cfg = g.config(true);
    if (port >= 0) cfg.port = port;
    auto backend = g.backend(cfg);
    Service svc(cfg, backend);
    std::cerr << "kaleido: serving on " << cfg.host << ':' << cfg.port << " (backend " << backend->mode() << ")\n";
    svc.run();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kaleido: value-pluralism reasoning over a pluggable model backend"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "Config JSON (backend, params, service settings)");
    app.add_option("--fixture", g.fixture, "Fixture backend file (overrides config)");
    app.add_option("--backend-url", g.backend_url, "Remote backend base URL (overrides config)");

    std::function<int()> run;

    auto* values = app.add_subcommand("values", "Generate the filtered, ranked value set for an action");
    std::string action, params_path, format = "json";
    values->add_option("--action", action, "Situation/action text")->required();
    values->add_option("--params", params_path, "SystemParams JSON");
    values->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));
    values->callback([&] { run = [&] { return cmd_values(g, action, params_path, format); }; });

    auto* decide_cmd = app.add_subcommand("decide", "Aggregate scored candidates into a judgment distribution");
    std::string in_path, weights_path;
    bool binary = false;
    decide_cmd->add_option("--in", in_path, "Candidates JSON")->required();
    decide_cmd->add_option("--weights", weights_path, "Weight overrides JSON");
    decide_cmd->add_flag("--binary", binary, "Drop the either class");
    decide_cmd->callback([&] { run = [&] { return cmd_decide(in_path, weights_path, binary); }; });

    auto* dataset = app.add_subcommand("dataset", "Corpus tooling");
    dataset->require_subcommand(1);
    auto* build = dataset->add_subcommand("build", "Build split seq2seq subtask files");
    std::string raw_dir, out_dir;
    std::uint64_t seed = 0;
    build->add_option("--raw", raw_dir, "Directory of raw batch files")->required();
    build->add_option("--out", out_dir, "Output directory")->required();
    build->add_option("--seed", seed, "Sampling seed")->required();
    build->callback([&] { run = [&] { return cmd_dataset_build(raw_dir, out_dir, seed); }; });
    auto* stats = dataset->add_subcommand("stats", "Corpus statistics");
    stats->add_option("--raw", raw_dir, "Directory of raw batch files")->required();
    stats->callback([&] { run = [&] { return cmd_dataset_stats(raw_dir); }; });

    auto* tune = app.add_subcommand("tune", "Gibbs-style search over system thresholds");
    std::string eval_path, grid_path, init_path, tune_out;
    int sweeps = 2;
    double t0 = 0.1, decay = 0.5;
    tune->add_option("--eval", eval_path, "Eval set JSON [{action, references}]")->required();
    tune->add_option("--grid", grid_path, "Parameter grid JSON")->required();
    tune->add_option("--sweeps", sweeps, "Number of sweeps")->required()->check(CLI::NonNegativeNumber);
    tune->add_option("--seed", seed, "Sampling seed")->required();
    tune->add_option("--init", init_path, "Initial SystemParams JSON (must lie on the grid)");
    tune->add_option("--t0", t0, "Initial temperature")->check(CLI::NonNegativeNumber);
    tune->add_option("--decay", decay, "Geometric temperature decay per sweep")->check(CLI::NonNegativeNumber);
    tune->add_option("--out", tune_out, "Directory for trace.json and best_params.json");
    tune->callback([&] { run = [&] { return cmd_tune(g, eval_path, grid_path, sweeps, seed, init_path, t0, decay, tune_out); }; });

    auto* eval = app.add_subcommand("eval", "Benchmark evaluation");
    eval->require_subcommand(1);
    auto* eval_ethics = eval->add_subcommand("ethics", "Zero-shot ETHICS evaluation");
    std::string subset, data, pred_out;
    eval_ethics->add_option("--subset", subset, "justice|deontology|virtue|utilitarianism|commonsense")->required();
    eval_ethics->add_option("--data", data, "Subset CSV")->required();
    eval_ethics->add_option("--out", pred_out, "Write per-example predictions as JSONL");
    eval_ethics->callback([&] { run = [&] { return cmd_eval_ethics(g, subset, data, pred_out); }; });

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    int port = -1;
    serve->add_option("--port", port, "Override the configured port");
    serve->callback([&] { run = [&] { return cmd_serve(g, port); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run();
    } catch (const UsageError& e) {
        std::cerr << "kaleido: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "kaleido: " << e.what() << '\n';
        return 1;
    }
}
