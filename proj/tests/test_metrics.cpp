#include <gtest/gtest.h>

#include <random>

#include "kgrag/metrics.hpp"
#include "oracles.hpp"

using namespace kgrag;

namespace {

std::string join(const oracle::Tokens& t) {
    std::string s;
    for (const auto& w : t) {
        if (!s.empty()) s += ' ';
        s += w;
    }
    return s;
}

void expect_prf(const ScoreTriple& got, const oracle::Prf& want) {
    EXPECT_DOUBLE_EQ(got.precision, want.p);
    EXPECT_DOUBLE_EQ(got.recall, want.r);
    EXPECT_DOUBLE_EQ(got.f1, want.f);
}

} // namespace

TEST(Tokenize, LowercasesAndSplitsOnNonAlnum) {
    const std::vector<std::string> want = {"the", "event", "on", "2024", "08", "19", "is", "raksha"};
    EXPECT_EQ(tokenize("The event on 2024-08-19 is \"Raksha"), want);
    EXPECT_TRUE(tokenize("  ,;-- ").empty());
    EXPECT_EQ(tokenize("09:00"), (std::vector<std::string>{"09", "00"}));
}

TEST(Rouge, FrozenUnigramExample) {
    const auto s = rouge_n("the cat sat", "the cat sat down", 1);
    EXPECT_DOUBLE_EQ(s.precision, 1.0);
    EXPECT_DOUBLE_EQ(s.recall, 0.75);
    EXPECT_NEAR(s.f1, 0.8571428571428571, 1e-12);
}

TEST(Rouge, FrozenLcsExample) {
    const auto s = rouge_l("a c b", "a b c");
    EXPECT_NEAR(s.precision, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-12);
}

TEST(Rouge, IdenticalTextsScoreOne) {
    const char* text = "Team Meeting on 2024-01-15 from 09:00 - 10:00.";
    for (int n : {1, 2}) {
        const auto s = rouge_n(text, text, n);
        EXPECT_DOUBLE_EQ(s.precision, 1.0);
        EXPECT_DOUBLE_EQ(s.recall, 1.0);
        EXPECT_DOUBLE_EQ(s.f1, 1.0);
    }
    EXPECT_DOUBLE_EQ(rouge_l(text, text).f1, 1.0);
    EXPECT_DOUBLE_EQ(bleu(text, text, 1), 1.0);
}

TEST(Rouge, EmptySidesScoreZero) {
    for (auto s : {rouge_n("", "abc", 1), rouge_n("abc", "", 1), rouge_n("", "", 2), rouge_l("", "x"),
                   rouge_l("x", ""), rouge_n("one", "one", 2)}) {
        EXPECT_EQ(s.precision, 0.0);
        EXPECT_EQ(s.recall, 0.0);
        EXPECT_EQ(s.f1, 0.0);
    }
}

TEST(Rouge, InvalidOrder) {
    for (int n : {0, 3, -1}) {
        try {
            rouge_n("a b", "a b", n);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::invalid_n);
        }
    }
}

TEST(Rouge, MatchesBruteForceOracle) {
    std::mt19937 rng(20240115);
    for (int trial = 0; trial < 400; ++trial) {
        const auto c = oracle::random_tokens(rng, 9, 4);
        const auto r = oracle::random_tokens(rng, 9, 4);
        SCOPED_TRACE(join(c) + " | " + join(r));
        expect_prf(rouge_n(c, r, 1), oracle::rouge_n(c, r, 1));
        expect_prf(rouge_n(c, r, 2), oracle::rouge_n(c, r, 2));
        expect_prf(rouge_l(c, r), oracle::rouge_l(c, r));
        expect_prf(rouge_n(join(c), join(r), 1), oracle::rouge_n(c, r, 1));
        EXPECT_EQ(lcs_length(c, r), oracle::lcs_exhaustive(c, r));
    }
}

TEST(Rouge, SymmetryAndBounds) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = oracle::random_tokens(rng, 12, 5);
        const auto b = oracle::random_tokens(rng, 12, 5);
        for (int n : {1, 2}) {
            const auto ab = rouge_n(a, b, n);
            const auto ba = rouge_n(b, a, n);
            EXPECT_DOUBLE_EQ(ab.precision, ba.recall);
            EXPECT_DOUBLE_EQ(ab.recall, ba.precision);
            EXPECT_NEAR(ab.f1, ba.f1, 1e-15);
            for (double v : {ab.precision, ab.recall, ab.f1}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
        const auto l = rouge_l(a, b);
        EXPECT_LE(l.f1, 1.0);
        EXPECT_GE(l.f1, 0.0);
    }
}

TEST(Bleu, FrozenClippingExample) {
    // Clipped p1 = 1/3; the candidate is longer than the reference so BP = 1.
    EXPECT_NEAR(bleu("the the the", "the cat", 1), 1.0 / 3.0, 1e-15);
}

TEST(Bleu, BrevityPenaltyOnlyWhenShorter) {
    EXPECT_DOUBLE_EQ(bleu("a b c d", "a b", 1), 0.5);
    EXPECT_NEAR(bleu("a b", "a b c d", 1), std::exp(1.0 - 2.0), 1e-15);
}

TEST(Bleu, EmptyAndOrderErrors) {
    EXPECT_EQ(bleu("", "a", 1), 0.0);
    EXPECT_EQ(bleu("a", "", 1), 0.0);
    for (int n : {0, 5}) {
        try {
            bleu("a", "a", n);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::invalid_n);
        }
    }
}

TEST(Bleu, MatchesBruteForceOracle) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 400; ++trial) {
        const auto c = oracle::random_tokens(rng, 10, 3);
        const auto r = oracle::random_tokens(rng, 10, 3);
        for (int n = 1; n <= 4; ++n) {
            EXPECT_NEAR(bleu(c, r, n), oracle::bleu(c, r, static_cast<std::size_t>(n)), 1e-12)
                << join(c) << " | " << join(r) << " n=" << n;
        }
    }
}

TEST(Aggregate, ColumnMeans) {
    std::vector<MetricRow> rows = {score_answer("a", "x y", "x y", 0.5), score_answer("b", "x", "z", 1.5)};
    const auto mean = aggregate(rows);
    EXPECT_EQ(mean.qa_id, "MEAN");
    EXPECT_DOUBLE_EQ(mean.rouge1.f1, 0.5);
    EXPECT_DOUBLE_EQ(mean.rouge2.precision, 0.5);
    EXPECT_DOUBLE_EQ(mean.bleu1, 0.5);
    EXPECT_DOUBLE_EQ(mean.latency_seconds, 1.0);
}

TEST(Aggregate, EmptyRejected) {
    try {
        aggregate({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::empty_input);
    }
}

TEST(Aggregate, MeanOfRandomRowsMatchesManualSum) {
    std::mt19937 rng(3);
    std::vector<MetricRow> rows;
    for (int i = 0; i < 50; ++i) {
        rows.push_back(score_answer("q" + std::to_string(i), join(oracle::random_tokens(rng, 8, 4)),
                                    join(oracle::random_tokens(rng, 8, 4)), 0.01 * i));
    }
    double r1 = 0, rl = 0, b = 0;
    for (const auto& row : rows) {
        r1 += row.rouge1.f1;
        rl += row.rougeL.recall;
        b += row.bleu1;
    }
    const auto mean = aggregate(rows);
    EXPECT_NEAR(mean.rouge1.f1, r1 / 50, 1e-12);
    EXPECT_NEAR(mean.rougeL.recall, rl / 50, 1e-12);
    EXPECT_NEAR(mean.bleu1, b / 50, 1e-12);
}
