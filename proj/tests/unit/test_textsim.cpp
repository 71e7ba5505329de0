#include <gtest/gtest.h>

#include <random>

#include "kaleido/kaleido.hpp"
#include "test_support.hpp"

using namespace kaleido;
namespace kt = kaleido::testing;

TEST(Tokenize, LowercasesAndSplitsOnNonAlnum) {
    EXPECT_EQ(tokenize("Duty to Respect others' property!"),
              (std::vector<std::string>{"duty", "to", "respect", "others", "property"}));
    EXPECT_TRUE(tokenize(" ,;- ").empty());
    EXPECT_EQ(tokenize("COVID-19"), (std::vector<std::string>{"covid", "19"}));
}

TEST(Rouge, WorkedExamples) {
    auto r = rouge_n("duty to respect others", "duty to respect property", 1);
    EXPECT_NEAR(r.f1, 0.75, 1e-9);
    EXPECT_NEAR(rouge_n("The cat sat", "the cat sat", 1).f1, 1.0, 1e-12);
    auto none = rouge_n("a", "a", 2);
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_EQ(none.recall, 0.0);
    EXPECT_EQ(none.f1, 0.0);
    EXPECT_THROW(rouge_n("a", "a", 0), InvalidArgument);
}

TEST(Rouge, NearDuplicateDutyCountsAsMatch) {
    // overlap {duty,to,obey} = 3: P = 3/4, R = 3/5
    auto r = rouge_n("Duty to obey laws", "Duty to obey the law", 1);
    EXPECT_NEAR(r.precision, 0.75, 1e-12);
    EXPECT_NEAR(r.recall, 0.6, 1e-12);
    EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
    EXPECT_GE(r.f1, kSetMatchThreshold);
}

TEST(RougeLSum, WorkedExamples) {
    EXPECT_NEAR(rouge_l_sum(std::vector<std::string>{"a b c"}, {"a c d"}).f1, 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(rouge_l_sum(std::vector<std::string>{"Value: Safety", "Duty: Duty to help"},
                            {"Value: Safety", "Duty: Duty to help"}).f1,
                1.0, 1e-12);
    EXPECT_EQ(rouge_l_sum(std::vector<std::string>{"a b"}, {"c d"}).f1, 0.0);
    auto empty = rouge_l_sum(std::vector<std::string>{}, {});
    EXPECT_EQ(empty.f1, 0.0);
    EXPECT_EQ(rouge_l_sum(std::vector<std::string>{}, {"a"}).f1, 0.0);
}

// Values produced by the reference Python rouge-score package (no stemming),
// scorer.score(target, prediction).
TEST(RougeLSum, MatchesReferencePackageOnMultiSentenceInput) {
    std::vector<std::string> target{"a c d", "x y b"};
    std::vector<std::string> prediction{"a b c", "b x y z"};
    auto r = rouge_l_sum(prediction, target);
    EXPECT_NEAR(r.precision, 0.7142857142857143, 1e-12);
    EXPECT_NEAR(r.recall, 0.8333333333333334, 1e-12);
    EXPECT_NEAR(r.f1, 0.7692307692307692, 1e-12);
    // the same lists joined by newlines score identically
    auto joined = rouge_l_sum(std::vector<std::string>{"a b c\nb x y z"}, {"a c d\nx y b"});
    EXPECT_DOUBLE_EQ(joined.f1, r.f1);

    auto r2 = rouge_n("a b c\nb x y z", "a c d\nx y b", 2);
    EXPECT_NEAR(r2.precision, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(r2.recall, 0.2, 1e-12);
    EXPECT_NEAR(r2.f1, 0.1818181818181818, 1e-12);
}

namespace {

std::string random_phrase(std::mt19937_64& rng, int max_tokens) {
    static const std::vector<std::string> words{"a", "b", "c", "Duty", "to", "respect", "law", "the", "safety", "b"};
    static const std::vector<std::string> glue{" ", " ", "  ", ", ", "-", "! "};
    std::uniform_int_distribution<int> len(0, max_tokens), w(0, static_cast<int>(words.size()) - 1),
        g(0, static_cast<int>(glue.size()) - 1);
    std::string s;
    for (int i = len(rng); i > 0; --i) s += words[static_cast<std::size_t>(w(rng))] + glue[static_cast<std::size_t>(g(rng))];
    return s;
}

}  // namespace

TEST(Rouge, MatchesBruteForceOnRandomShortStrings) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_phrase(rng, 6), b = random_phrase(rng, 6);
        for (int n : {1, 2}) {
            auto got = rouge_n(a, b, n);
            auto want = kt::oracle_rouge_n(a, b, static_cast<std::size_t>(n));
            EXPECT_NEAR(got.precision, want[0], 1e-12) << a << " | " << b;
            EXPECT_NEAR(got.recall, want[1], 1e-12);
            EXPECT_NEAR(got.f1, want[2], 1e-12);
            EXPECT_NEAR(rouge_n(b, a, n).f1, got.f1, 1e-12);
        }
        auto ta = kt::oracle_tokens(a), tb = kt::oracle_tokens(b);
        double lcs = static_cast<double>(kt::oracle_lcs(ta, tb));
        double p = ta.empty() ? 0 : lcs / static_cast<double>(ta.size());
        double r = tb.empty() ? 0 : lcs / static_cast<double>(tb.size());
        auto got = rouge_l_sum(std::vector<std::string>{a}, {b});
        EXPECT_NEAR(got.precision, p, 1e-12) << a << " | " << b;
        EXPECT_NEAR(got.recall, r, 1e-12);
        EXPECT_NEAR(got.f1, kt::oracle_f1(p, r), 1e-12);
    }
}

TEST(ContentOverlap, WorkedExamples) {
    auto e = [](ValueKind k, std::string t) { return make_entry(k, std::move(t)); };
    EXPECT_EQ(content_overlap(e(ValueKind::Duty, "Duty to express displeasure"), e(ValueKind::Duty, "Duty to be a considerate driver")), 0.0);
    EXPECT_DOUBLE_EQ(content_overlap(e(ValueKind::Value, "Value: Safety"), e(ValueKind::Value, "Value: Public safety")), 0.5);
    EXPECT_EQ(content_overlap(e(ValueKind::Right, "Right to safety"), e(ValueKind::Right, "Right to safety")), 1.0);
    EXPECT_EQ(content_overlap(e(ValueKind::Right, "Right of the"), e(ValueKind::Right, "Right of the")), 0.0);
    EXPECT_THROW(content_overlap(e(ValueKind::Right, "Safety"), e(ValueKind::Value, "Safety")), InvalidArgument);
}

TEST(ContentOverlap, StripsMarkersCaseInsensitively) {
    EXPECT_EQ(content_tokens("DUTY: duty OF Care"), (std::set<std::string>{"care"}));
    EXPECT_EQ(content_tokens("Right to life (for animals)"), (std::set<std::string>{"life", "animals"}));
    EXPECT_EQ(kStopwords.size(), 50u);
}

TEST(ContentOverlap, AgreesWithIndependentJaccardAndIsSymmetric) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        auto a = "Duty to " + random_phrase(rng, 5), b = random_phrase(rng, 5);
        if (trim(b).empty()) b = "the";  // entries need visible text
        auto ea = make_entry(ValueKind::Duty, a), eb = make_entry(ValueKind::Duty, b);
        double got = content_overlap(ea, eb);
        EXPECT_NEAR(got, kt::oracle_jaccard(a, b), 1e-12) << a << " | " << b;
        EXPECT_EQ(got, content_overlap(eb, ea));
        EXPECT_GE(got, 0.0);
        EXPECT_LE(got, 1.0);
        if (!content_tokens(a).empty()) { EXPECT_EQ(content_overlap(ea, ea), 1.0); }
    }
}

TEST(Cosine, WorkedExamplesAndErrors) {
    EXPECT_EQ(cosine(std::vector<double>{1, 0}, {0, 1}), 0.0);
    EXPECT_NEAR(cosine(std::vector<double>{1, 1}, {1, 1}), 1.0, 1e-15);
    EXPECT_NEAR(cosine(std::vector<double>{1, 2}, {2, 1}), 0.8, 1e-12);
    EXPECT_THROW(cosine(std::vector<double>{0, 0}, {1, 1}), InvalidArgument);
    EXPECT_THROW(cosine(std::vector<double>{1}, {1, 1}), InvalidArgument);
}

TEST(Cosine, ScaleInvariantAndBounded) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10), c(0.01, 100);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(4), y(4);
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = u(rng);
        double s = c(rng);
        auto sy = y;
        for (auto& v : sy) v *= s;
        EXPECT_NEAR(cosine(x, sy), cosine(x, y), 1e-12);
        EXPECT_NEAR(cosine(x, x), 1.0, 1e-12);
        EXPECT_LE(std::abs(cosine(x, y)), 1.0);
        EXPECT_NEAR(cosine(x, y), kt::oracle_cosine(x, y), 1e-12);
    }
}
