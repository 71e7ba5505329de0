#pragma once

// N-gram metrics (Rouge-N, summary-level Rouge-L), the unigram content
// overlap used by the deduplication gate, and cosine similarity.
//
// Tokenization: ASCII-lowercase, then split on every run of characters
// outside [a-z0-9]. No stemming.

#include <algorithm>
#include <cctype>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kaleido/core.hpp"

namespace kaleido {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline PRF make_prf(double precision, double recall) {
    double denom = precision + recall;
    return {precision, recall, denom > 0.0 ? 2.0 * precision * recall / denom : 0.0};
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace detail {

// n-grams joined with a unit separator, which the tokenizer never emits
inline std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, int> counts;
    const auto len = static_cast<std::size_t>(n);
    if (tokens.size() < len) return counts;
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t k = 1; k < len; ++k) {
            key += '\x1f';
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

inline int total(const std::map<std::string, int>& m) {
    int t = 0;
    for (const auto& [_, c] : m) t += c;
    return t;
}

using LcsTable = std::vector<std::vector<int>>;

inline LcsTable lcs_table(const std::vector<std::string>& ref, const std::vector<std::string>& cand) {
    LcsTable t(ref.size() + 1, std::vector<int>(cand.size() + 1, 0));
    for (std::size_t i = 1; i <= ref.size(); ++i)
        for (std::size_t j = 1; j <= cand.size(); ++j)
            t[i][j] = ref[i - 1] == cand[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    return t;
}

// Indices into ref of one LCS; the backtracking order fixes which LCS when
// several exist.
inline std::vector<std::size_t> lcs_indices(const std::vector<std::string>& ref, const std::vector<std::string>& cand) {
    auto t = lcs_table(ref, cand);
    std::vector<std::size_t> idx;
    std::size_t i = ref.size(), j = cand.size();
    while (i > 0 && j > 0) {
        if (ref[i - 1] == cand[j - 1]) {
            idx.push_back(i - 1);
            --i;
            --j;
        } else if (t[i][j - 1] > t[i - 1][j]) {
            --j;
        } else {
            --i;
        }
    }
    std::reverse(idx.begin(), idx.end());
    return idx;
}

inline std::vector<std::vector<std::string>> sentences(std::span<const std::string> items) {
    std::vector<std::vector<std::string>> out;
    for (const auto& item : items) {
        std::size_t start = 0;
        while (start <= item.size()) {
            auto nl = item.find('\n', start);
            auto line = std::string_view(item).substr(start, nl == std::string::npos ? std::string::npos : nl - start);
            if (!line.empty()) out.push_back(tokenize(line));
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
    }
    return out;
}

}  // namespace detail

inline PRF rouge_n(std::string_view candidate, std::string_view reference, int n) {
    if (n < 1) throw InvalidArgument("rouge_n: n must be >= 1");
    auto cand = detail::ngram_counts(tokenize(candidate), n);
    auto ref = detail::ngram_counts(tokenize(reference), n);
    if (cand.empty() || ref.empty()) return {};
    int overlap = 0;
    for (const auto& [gram, c] : cand)
        if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(c, it->second);
    return make_prf(static_cast<double>(overlap) / detail::total(cand), static_cast<double>(overlap) / detail::total(ref));
}

/// Summary-level Rouge-L. Each item (and each line inside an item) is one
/// sentence. For every reference sentence the union of its LCS positions
/// against all candidate sentences is taken; hits are capped by the token
/// counts available on both sides.
inline PRF rouge_l_sum(std::span<const std::string> candidate_items, std::span<const std::string> reference_items) {
    auto cand = detail::sentences(candidate_items);
    auto ref = detail::sentences(reference_items);
    std::map<std::string, int> cand_counts, ref_counts;
    std::size_t cand_len = 0, ref_len = 0;
    for (const auto& s : cand) {
        cand_len += s.size();
        for (const auto& t : s) ++cand_counts[t];
    }
    for (const auto& s : ref) {
        ref_len += s.size();
        for (const auto& t : s) ++ref_counts[t];
    }
    if (cand_len == 0 || ref_len == 0) return {};

    int hits = 0;
    for (const auto& r : ref) {
        std::set<std::size_t> union_idx;
        for (const auto& c : cand) {
            auto idx = detail::lcs_indices(r, c);
            union_idx.insert(idx.begin(), idx.end());
        }
        for (auto i : union_idx) {
            const auto& tok = r[i];
            if (cand_counts[tok] > 0 && ref_counts[tok] > 0) {
                ++hits;
                --cand_counts[tok];
                --ref_counts[tok];
            }
        }
    }
    return make_prf(static_cast<double>(hits) / static_cast<double>(cand_len),
                    static_cast<double>(hits) / static_cast<double>(ref_len));
}

inline PRF rouge_l_sum(const std::vector<std::string>& candidate_items, const std::vector<std::string>& reference_items) {
    return rouge_l_sum(std::span<const std::string>(candidate_items), std::span<const std::string>(reference_items));
}

// Fixed English function-word list for content_overlap. Changing it changes
// every dedup decision; keep in sync with README.
inline constexpr std::array<std::string_view, 50> kStopwords{
    "a",    "an",    "the",  "and",  "or",    "but",  "if",   "of",   "to",   "in",
    "on",   "at",    "by",   "for",  "with",  "from", "as",   "into", "about", "than",
    "is",   "are",   "was",  "were", "be",    "been", "being", "do",  "does", "s",
    "have", "has",   "had",  "it",   "its",   "this", "that", "these", "those", "i",
    "me",   "my",    "you",  "your", "he",    "his",  "she",  "her",  "they", "their"};

inline bool is_stopword(std::string_view tok) {
    return std::find(kStopwords.begin(), kStopwords.end(), tok) != kStopwords.end();
}

/// Lowercase unigram set of an entry with the kind marker ("Value:",
/// "Right to/of", "Duty to/of") and stopwords removed.
inline std::set<std::string> content_tokens(std::string_view text) {
    auto s = to_lower(trim_view(text));
    for (std::string_view marker : {"value:", "right:", "duty:"}) {
        if (s.starts_with(marker)) {
            s = trim(std::string_view(s).substr(marker.size()));
            break;
        }
    }
    for (std::string_view marker : {"right to", "right of", "duty to", "duty of"}) {
        if (s.starts_with(marker) && (s.size() == marker.size() || std::isspace(static_cast<unsigned char>(s[marker.size()])))) {
            s = s.substr(marker.size());
            break;
        }
    }
    std::set<std::string> out;
    for (auto& t : tokenize(s))
        if (!is_stopword(t)) out.insert(std::move(t));
    return out;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

/// Jaccard similarity of the content-token sets of two same-kind entries.
inline double content_overlap(const ValueEntry& a, const ValueEntry& b) {
    if (a.kind != b.kind) throw InvalidArgument("content_overlap: entries must share a kind");
    return jaccard(content_tokens(a.text), content_tokens(b.text));
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InvalidArgument("cosine: dimension mismatch");
    if (u.empty()) throw InvalidArgument("cosine: empty vectors");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw InvalidArgument("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    return cosine(std::span<const double>(u), std::span<const double>(v));
}

}  // namespace kaleido
