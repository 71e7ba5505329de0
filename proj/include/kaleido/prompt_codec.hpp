#pragma once

// Text formats of the four seq2seq tasks. Fields are separated by a single
// tab character; this is a byte-exact contract with the training data.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "kaleido/core.hpp"

namespace kaleido {

enum class Task { Generate, Relevance, Valence, Explanation };

inline std::string_view to_string(Task t) {
    switch (t) {
    case Task::Generate: return "Generate";
    case Task::Relevance: return "Relevance";
    case Task::Valence: return "Valence";
    case Task::Explanation: return "Explanation";
    }
    return "Generate";
}

inline std::optional<Task> task_from_string(std::string_view s) {
    for (auto t : {Task::Generate, Task::Relevance, Task::Valence, Task::Explanation})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

struct PromptEntry {
    ValueKind kind;
    std::string text;
};

struct TaskPrompt {
    Task task = Task::Generate;
    std::string action;
    std::optional<PromptEntry> entry;
};

inline std::string encode_task(const TaskPrompt& p) {
    std::string out = "[" + std::string(to_string(p.task)) + "]:\tAction: " + p.action;
    if (p.task == Task::Generate) {
        if (p.entry) throw InvalidArgument("Generate prompts take no entry");
        return out;
    }
    if (!p.entry) throw InvalidArgument(std::string(to_string(p.task)) + " prompt requires an entry");
    out += '\t';
    out += to_string(p.entry->kind);
    out += ": ";
    out += p.entry->text;
    return out;
}

inline std::string encode_task(Task task, std::string_view action) {
    return encode_task(TaskPrompt{task, std::string(action), std::nullopt});
}

inline std::string encode_task(Task task, std::string_view action, ValueKind kind, std::string_view text) {
    return encode_task(TaskPrompt{task, std::string(action), PromptEntry{kind, std::string(text)}});
}

/// Generation target form "Kind: text".
inline std::string encode_generation_target(ValueKind kind, std::string_view text) {
    return std::string(to_string(kind)) + ": " + std::string(text);
}

/// Splits a generated beam "Kind: text" into its kind and trimmed text.
inline std::pair<ValueKind, std::string> parse_generation_output(std::string_view line) {
    auto s = trim_view(line);
    auto colon = s.find(':');
    if (colon == std::string_view::npos) throw ParseError("generation output has no kind prefix");
    auto kind = kind_from_string(trim_view(s.substr(0, colon)));
    if (!kind) throw ParseError("unknown kind prefix '" + std::string(s.substr(0, colon)) + "'");
    auto text = trim(s.substr(colon + 1));
    if (text.empty()) throw ParseError("generation output has empty text");
    return {*kind, text};
}

enum class RelevanceLabel { Yes, No };

inline std::string_view to_string(RelevanceLabel r) { return r == RelevanceLabel::Yes ? "Yes" : "No"; }

using Label = std::variant<RelevanceLabel, ValenceLabel>;

inline Label parse_label(Task task, std::string_view text) {
    auto t = to_lower(trim_view(text));
    switch (task) {
    case Task::Relevance:
        if (t == "yes") return RelevanceLabel::Yes;
        if (t == "no") return RelevanceLabel::No;
        throw ParseError("unrecognized relevance label '" + std::string(text) + "'");
    case Task::Valence:
        if (auto v = valence_from_string(t)) return *v;
        throw ParseError("unrecognized valence label '" + std::string(text) + "'");
    default:
        throw InvalidArgument("labels exist only for Relevance and Valence tasks");
    }
}

}  // namespace kaleido
