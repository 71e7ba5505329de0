#pragma once

// Corpus tooling: raw distillation batches -> situation records -> seq2seq
// subtask rows, situation-disjoint splits, statistics, dist-n.
//
// Raw batch grammar (one record):
//
//   <situation> ->
//    Values:
//   - <name>: <explanation> [supports|opposes|either]
//   Rights:
//   - N/A
//   Duties:
//   - <name>: <explanation> [opposes, perfect]
//   -----------------
//
// "Section: N/A" on one line is also accepted. The situation arrow may be
// "->" or "-->". Duty tags carry an optional perfect/imperfect marker that is
// validated and then discarded.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kaleido/core.hpp"
#include "kaleido/prompt_codec.hpp"
#include "kaleido/random.hpp"
#include "kaleido/textsim.hpp"

namespace kaleido {

struct SituationRecord {
    std::string situation;
    std::vector<ValueEntry> entries;

    friend bool operator==(const SituationRecord&, const SituationRecord&) = default;
};

namespace detail {

inline std::optional<ValueKind> section_kind(std::string_view word) {
    auto w = to_lower(word);
    if (w == "values") return ValueKind::Value;
    if (w == "rights") return ValueKind::Right;
    if (w == "duties") return ValueKind::Duty;
    return std::nullopt;
}

inline bool is_separator(std::string_view t) {
    return t.size() >= 3 && t.find_first_not_of('-') == std::string_view::npos;
}

inline bool is_na(std::string_view t) { return iequals(trim_view(t), "N/A"); }

inline ValueEntry parse_item(std::string_view body, ValueKind kind, std::size_t line_no) {
    body = trim_view(body);
    if (body.empty() || body.back() != ']') throw ParseError("item is missing its [valence] tag", line_no);
    auto open = body.rfind('[');
    if (open == std::string_view::npos) throw ParseError("item is missing its [valence] tag", line_no);
    auto tag = body.substr(open + 1, body.size() - open - 2);
    auto head = trim_view(body.substr(0, open));

    std::vector<std::string> parts;
    std::stringstream ss{std::string(tag)};
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(trim(p));
    if (parts.empty() || parts.size() > 2) throw ParseError("malformed valence tag [" + std::string(tag) + "]", line_no);
    auto valence = valence_from_string(parts[0]);
    if (!valence) throw ParseError("unknown valence '" + parts[0] + "'", line_no);
    if (parts.size() == 2) {
        auto marker = to_lower(parts[1]);
        if (marker != "perfect" && marker != "imperfect")
            throw ParseError("unknown duty marker '" + parts[1] + "'", line_no);
    }

    ValueEntry e;
    e.kind = kind;
    e.valence_label = valence;
    auto sep = head.find(": ");
    if (sep == std::string_view::npos) {
        e.text = trim(head.ends_with(":") ? head.substr(0, head.size() - 1) : head);
    } else {
        e.text = trim(head.substr(0, sep));
        auto expl = trim(head.substr(sep + 2));
        if (!expl.empty()) e.explanation = std::move(expl);
    }
    if (e.text.empty()) throw ParseError("item has an empty name", line_no);
    return e;
}

}  // namespace detail

/// Parses a raw batch stream. Errors carry 1-based line numbers.
inline std::vector<SituationRecord> parse_corpus(std::istream& in) {
    std::vector<SituationRecord> records;
    std::optional<SituationRecord> cur;
    std::optional<ValueKind> section;
    std::size_t sections_seen = 0;
    std::size_t record_line = 0;
    std::size_t line_no = 0;

    auto finish = [&](std::size_t at) {
        if (sections_seen == 0) throw ParseError("unterminated record '" + cur->situation + "' has no sections", at);
        records.push_back(std::move(*cur));
        cur.reset();
        section.reset();
        sections_seen = 0;
    };

    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        auto t = trim_view(raw);
        if (t.empty()) continue;

        if (detail::is_separator(t)) {
            if (cur) finish(line_no);
            continue;
        }
        if (t.ends_with("->")) {
            if (cur) throw ParseError("unterminated record '" + cur->situation + "' (missing separator line)", line_no);
            auto sit = t.substr(0, t.size() - 2);
            while (!sit.empty() && sit.back() == '-') sit.remove_suffix(1);
            cur = SituationRecord{trim(sit), {}};
            if (cur->situation.empty()) throw ParseError("empty situation", line_no);
            record_line = line_no;
            continue;
        }
        if (t.starts_with("-")) {
            if (!cur || !section) throw ParseError("item line outside a section", line_no);
            auto body = t.substr(1);
            if (detail::is_na(body)) continue;
            cur->entries.push_back(detail::parse_item(body, *section, line_no));
            continue;
        }
        if (auto colon = t.find(':'); colon != std::string_view::npos) {
            auto word = trim_view(t.substr(0, colon));
            auto rest = trim_view(t.substr(colon + 1));
            auto kind = detail::section_kind(word);
            if (!kind) throw ParseError("unknown section header '" + std::string(word) + "'", line_no);
            if (!cur) throw ParseError("section header outside a record", line_no);
            if (!rest.empty() && !detail::is_na(rest)) throw ParseError("unexpected text after section header", line_no);
            section = kind;
            ++sections_seen;
            continue;
        }
        throw ParseError("unexpected line '" + std::string(t) + "'", line_no);
    }
    if (cur) finish(record_line);
    return records;
}

inline std::vector<SituationRecord> parse_corpus(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in);
}

/// Parses every regular file in a directory in filename order.
inline std::vector<SituationRecord> parse_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<SituationRecord> all;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw Error("cannot read " + f.string());
        try {
            auto recs = parse_corpus(in);
            all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
        } catch (const ParseError& e) {
            throw ParseError(f.filename().string() + ": " + e.what());
        }
    }
    return all;
}

inline std::string serialize_corpus(const std::vector<SituationRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.situation + " -> \n";
        bool first = true;
        for (auto kind : kAllKinds) {
            if (!first) out += '\n';
            first = false;
            out += kind == ValueKind::Value ? "Values:\n" : kind == ValueKind::Right ? "Rights:\n" : "Duties:\n";
            bool any = false;
            for (const auto& e : r.entries) {
                if (e.kind != kind) continue;
                any = true;
                out += "- " + e.text;
                if (e.explanation) out += ": " + *e.explanation;
                out += " [" + to_lower(to_string(e.valence_label.value_or(ValenceLabel::Either))) + "]\n";
            }
            if (!any) out += "- N/A\n";
        }
        out += "-----------------\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subtasks

struct SubtaskRecord {
    Task task = Task::Generate;
    std::string input;
    std::string target;
    std::size_t situation_id = 0;
};

inline ordered_json to_json(const SubtaskRecord& r) {
    ordered_json j;
    j["task"] = to_string(r.task);
    j["input"] = r.input;
    j["target"] = r.target;
    j["situation_id"] = r.situation_id;
    return j;
}

inline std::string to_jsonl(const std::vector<SubtaskRecord>& rows) {
    std::string out;
    for (const auto& r : rows) out += to_json(r).dump() + '\n';
    return out;
}

/// Emits, per entry: Generate, Relevance (positive, "Yes"), Relevance
/// (negative, "No"), Valence, Explanation. The negative entry is drawn
/// uniformly from other situations' entries, rejecting any whose text also
/// appears in this situation. Situation ids are record indices.
inline std::vector<SubtaskRecord> build_subtasks(const std::vector<SituationRecord>& records, std::uint64_t seed) {
    if (records.size() < 2) throw InvalidArgument("build_subtasks needs at least two situations to sample negatives");

    struct Ref {
        std::size_t situation;
        const ValueEntry* entry;
    };
    std::vector<Ref> pool;
    for (std::size_t s = 0; s < records.size(); ++s)
        for (const auto& e : records[s].entries) pool.push_back({s, &e});

    Rng rng(seed);
    std::vector<SubtaskRecord> rows;
    for (std::size_t s = 0; s < records.size(); ++s) {
        const auto& rec = records[s];
        std::set<std::string> own;
        for (const auto& e : rec.entries) own.insert(trim(e.text));
        auto eligible = [&](const Ref& r) { return r.situation != s && !own.count(trim(r.entry->text)); };

        for (const auto& e : rec.entries) {
            if (!e.valence_label) throw InvalidArgument("entry '" + e.text + "' has no valence label");

            const ValueEntry* negative = nullptr;
            for (int attempt = 0; attempt < 64 && !negative; ++attempt) {
                const auto& cand = pool[uniform_index(rng, pool.size())];
                if (eligible(cand)) negative = cand.entry;
            }
            if (!negative) {
                std::vector<const ValueEntry*> valid;
                for (const auto& r : pool)
                    if (eligible(r)) valid.push_back(r.entry);
                if (valid.empty())
                    throw InvalidArgument("no negative candidates available for situation '" + rec.situation + "'");
                negative = valid[uniform_index(rng, valid.size())];
            }

            rows.push_back({Task::Generate, encode_task(Task::Generate, rec.situation), e.display(), s});
            rows.push_back({Task::Relevance, encode_task(Task::Relevance, rec.situation, e.kind, e.text), "Yes", s});
            rows.push_back({Task::Relevance, encode_task(Task::Relevance, rec.situation, negative->kind, negative->text), "No", s});
            rows.push_back({Task::Valence, encode_task(Task::Valence, rec.situation, e.kind, e.text),
                            std::string(to_string(*e.valence_label)), s});
            rows.push_back({Task::Explanation, encode_task(Task::Explanation, rec.situation, e.kind, e.text),
                            e.explanation.value_or(""), s});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Splits

enum class Split { Train, Val, Test };

inline std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "train";
}

/// Situation id -> split.
struct SplitAssignment {
    std::vector<Split> of;

    std::size_t count(Split s) const { return static_cast<std::size_t>(std::count(of.begin(), of.end(), s)); }
};

/// Seeded shuffle, then contiguous floor(80%) / floor(10%) / remainder cut.
inline SplitAssignment split_by_situation(std::size_t num_situations, std::uint64_t seed) {
    std::vector<std::size_t> ids(num_situations);
    for (std::size_t i = 0; i < num_situations; ++i) ids[i] = i;
    Rng rng(seed);
    shuffle_in_place(ids, rng);
    const auto n_train = num_situations * 8 / 10;
    const auto n_val = num_situations / 10;
    SplitAssignment a{std::vector<Split>(num_situations, Split::Test)};
    for (std::size_t i = 0; i < num_situations; ++i)
        a.of[ids[i]] = i < n_train ? Split::Train : i < n_train + n_val ? Split::Val : Split::Test;
    return a;
}

inline SplitAssignment split_by_situation(const std::vector<SituationRecord>& records, std::uint64_t seed) {
    return split_by_situation(records.size(), seed);
}

// ---------------------------------------------------------------------------
// Statistics

struct KindStats {
    std::size_t total = 0;
    std::size_t unique = 0;
    double average = 0.0;  // per situation
};

struct CorpusStats {
    std::size_t situations = 0;
    PerKind<KindStats> kinds{};
};

inline CorpusStats corpus_stats(const std::vector<SituationRecord>& records) {
    CorpusStats st;
    st.situations = records.size();
    PerKind<std::set<std::string>> uniq;
    for (const auto& r : records)
        for (const auto& e : r.entries) {
            ++st.kinds[kind_index(e.kind)].total;
            uniq[kind_index(e.kind)].insert(trim(e.text));
        }
    for (auto k : kAllKinds) {
        auto& ks = st.kinds[kind_index(k)];
        ks.unique = uniq[kind_index(k)].size();
        ks.average = st.situations ? static_cast<double>(ks.total) / static_cast<double>(st.situations) : 0.0;
    }
    return st;
}

inline ordered_json to_json(const CorpusStats& st) {
    ordered_json j;
    j["situations"] = st.situations;
    for (auto k : kAllKinds) {
        const auto& ks = st.kinds[kind_index(k)];
        ordered_json kj;
        kj["total"] = ks.total;
        kj["unique"] = ks.unique;
        kj["average"] = ks.average;
        j[std::string(to_string(k))] = kj;
    }
    return j;
}

/// Unique n-grams over the whole list divided by the total n-gram count.
/// N-grams never span two texts.
inline double distinct_n(const std::vector<std::string>& texts, int n) {
    if (n < 1) throw InvalidArgument("distinct_n: n must be >= 1");
    std::set<std::string> unique;
    std::size_t total = 0;
    for (const auto& t : texts) {
        for (const auto& [gram, c] : detail::ngram_counts(tokenize(t), n)) {
            unique.insert(gram);
            total += static_cast<std::size_t>(c);
        }
    }
    return total ? static_cast<double>(unique.size()) / static_cast<double>(total) : 0.0;
}

}  // namespace kaleido
