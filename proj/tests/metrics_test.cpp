#include "evoclean/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "evoclean/errors.hpp"
#include "evoclean/rng.hpp"
#include "test_util.hpp"

using namespace evoclean;
using namespace evoclean::testutil;

namespace {

WhitespaceTokenizer tok;

Document doc(const std::string& id, const std::string& text) {
    Document d;
    d.id = id;
    d.text = text;
    d.token_count = tok.count(text);
    return d;
}

// Brute-force bigram F1 oracle, kept deliberately naive: counts bigrams via
// sorted vectors rather than hash maps.
double oracle_f1(const std::string& a, const std::string& b) {
    auto grams = [](const std::string& s) {
        auto t = tok.tokenize(s);
        std::vector<std::string> g;
        for (std::size_t i = 0; i + 1 < t.size(); ++i) g.push_back(t[i] + "\x1f" + t[i + 1]);
        std::sort(g.begin(), g.end());
        return g;
    };
    auto ga = grams(a), gb = grams(b);
    if (ga.empty() || gb.empty()) return 0.0;
    std::size_t overlap = 0, ia = 0, ib = 0;
    while (ia < ga.size() && ib < gb.size()) {
        if (ga[ia] == gb[ib]) {
            ++overlap;
            ++ia;
            ++ib;
        } else if (ga[ia] < gb[ib]) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(ga.size() + gb.size());
}

}  // namespace

// ------------------------------------------------------------------ entropy

TEST(EntropyTest, UniformOver1024TokensIsTenBits) {
    TokenDistribution dist;
    for (int i = 0; i < 1024; ++i) dist.add("tok" + std::to_string(i));
    EXPECT_DOUBLE_EQ(shannon_entropy(dist), 10.0);
}

TEST(EntropyTest, SingleTokenIsZero) {
    TokenDistribution dist;
    dist.add("only", 17);
    EXPECT_DOUBLE_EQ(shannon_entropy(dist), 0.0);
}

TEST(EntropyTest, AnalyticSmallCase) {
    TokenDistribution dist;
    dist.add("a", 2);
    dist.add("b", 1);
    dist.add("c", 1);
    EXPECT_DOUBLE_EQ(shannon_entropy(dist), 1.5);
}

TEST(EntropyTest, EmptyRejected) {
    TokenDistribution dist;
    EXPECT_THROW(shannon_entropy(dist), ValidationError);
}

TEST(EntropyTest, MatchesBruteForceOracleOnCorpus) {
    std::vector<Document> docs;
    for (int i = 0; i < 30; ++i) {
        docs.push_back(doc("d" + std::to_string(i),
                           "alpha beta w" + std::to_string(i % 7) + " gamma"));
    }
    auto dist = TokenDistribution::from_docs(docs, tok);
    // oracle: recount from scratch over raw strings
    std::map<std::string, long> counts;
    long total = 0;
    for (const auto& d : docs) {
        for (const auto& t : tok.tokenize(d.text)) {
            counts[t]++;
            total++;
        }
    }
    double h = 0;
    for (const auto& [t, c] : counts) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    double rel = std::abs(shannon_entropy(dist) - h) / std::max(1e-300, std::abs(h));
    EXPECT_LE(rel, 1e-9);
}

// ------------------------------------------------------------------- rouge

TEST(SelfRougeTest, IdenticalDocsScoreOne) {
    std::vector<Document> docs = {doc("a", "the cat sat on the mat. it purred loudly."),
                                  doc("b", "the cat sat on the mat. it purred loudly.")};
    EXPECT_DOUBLE_EQ(self_rouge2(docs, tok, 1, 7).value, 1.0);
}

TEST(SelfRougeTest, DisjointBigramsScoreZero) {
    std::vector<Document> docs = {doc("a", "one two three four"), doc("b", "five six seven eight")};
    EXPECT_DOUBLE_EQ(self_rouge2(docs, tok, 1, 7).value, 0.0);
}

TEST(SelfRougeTest, TenDocsMatchExhaustiveOracle) {
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i) {
        std::string text = "shared prefix words ";
        for (int t = 0; t < 6; ++t) text += "u" + std::to_string((i * 5 + t) % 13) + " ";
        docs.push_back(doc("d" + std::to_string(i), text));
    }
    // refs >= n-1 makes sampling cover every other document, so the oracle is
    // the max F1 over all pairs, computed independently.
    double got = self_rouge2(docs, tok, 9, 123).value;
    double expected = 0.0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < docs.size(); ++j) {
            if (i == j) continue;
            best = std::max(best, oracle_f1(docs[i].text, docs[j].text));
        }
        expected += best;
    }
    expected /= static_cast<double>(docs.size());
    EXPECT_NEAR(got, expected, 1e-12);
}

TEST(SelfRougeTest, ShortDocContributesZeroAndIsCounted) {
    std::vector<Document> docs = {doc("a", "x y z w"), doc("b", "x y z w"), doc("c", "single")};
    auto res = self_rouge2(docs, tok, 2, 9);
    EXPECT_EQ(res.short_docs, 1u);
    EXPECT_NEAR(res.value, 2.0 / 3.0, 1e-12);  // a and b are identical, c contributes 0
}

TEST(SelfRougeTest, InvariantUnderReordering) {
    std::vector<Document> docs;
    for (int i = 0; i < 16; ++i) {
        docs.push_back(doc("id" + std::to_string(i),
                           "p q r s" + std::to_string(i % 5) + " t u v" + std::to_string(i % 3)));
    }
    double forward = self_rouge2(docs, tok, 4, 99).value;
    std::vector<Document> reversed(docs.rbegin(), docs.rend());
    double backward = self_rouge2(reversed, tok, 4, 99).value;
    EXPECT_DOUBLE_EQ(forward, backward);
}

// --------------------------------------------------------------- embeddings

TEST(HashEmbedTest, DeterministicAndUnitNorm) {
    auto a = hash_embed("alpha beta gamma delta", tok, 256, 5);
    auto b = hash_embed("alpha beta gamma delta", tok, 256, 5);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NEAR(cosine(a, b), 1.0, 1e-12);
    double norm = 0;
    for (double v : a.values) norm += v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(HashEmbedTest, ShortTextFlaggedWithZeroNorm) {
    auto v = hash_embed("single", tok, 64, 5);
    EXPECT_DOUBLE_EQ(v.norm, 0.0);
}

TEST(HashEmbedTest, OrderingOfSimilarities) {
    auto v1 = hash_embed("a b", tok, 128, 3);
    auto v2 = hash_embed("a b", tok, 128, 3);
    auto v3 = hash_embed("x y", tok, 128, 3);
    EXPECT_NEAR(cosine(v1, v2), 1.0, 1e-12);
    EXPECT_GT(cosine(v1, v2), cosine(v1, v3));
}

TEST(HashEmbedTest, DisjointVocabularyNearlyOrthogonalAt4096) {
    std::string a, b;
    for (int i = 0; i < 60; ++i) {
        a += "left" + std::to_string(i) + " ";
        b += "right" + std::to_string(i) + " ";
    }
    auto va = hash_embed(a, tok, 4096, 11);
    auto vb = hash_embed(b, tok, 4096, 11);
    EXPECT_LE(std::abs(cosine(va, vb)), 0.25);
}

TEST(CosineTest, SymmetricExactly) {
    auto a = hash_embed("m n o p q", tok, 64, 1);
    auto b = hash_embed("n o p q r", tok, 64, 1);
    EXPECT_EQ(cosine(a, b), cosine(b, a));
}

// --------------------------------------------------------------------- l2

TEST(PairwiseL2Test, IdenticalVectorsZero) {
    auto v = hash_embed("a b c", tok, 32, 2);
    EXPECT_DOUBLE_EQ(mean_pairwise_l2({v, v}), 0.0);
}

TEST(PairwiseL2Test, OrthonormalPairIsSqrtTwo) {
    EmbeddingVector e1{{1, 0, 0, 0}, 1.0};
    EmbeddingVector e2{{0, 1, 0, 0}, 1.0};
    EXPECT_NEAR(mean_pairwise_l2({e1, e2}), std::sqrt(2.0), 1e-15);
}

TEST(PairwiseL2Test, TwentyRandomUnitVectorsMatchDirectLoop) {
    std::vector<EmbeddingVector> vecs;
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
        EmbeddingVector v;
        v.values.resize(24);
        double sq = 0;
        for (auto& x : v.values) {
            x = rng.unit() * 2.0 - 1.0;
            sq += x * x;
        }
        v.norm = std::sqrt(sq);
        for (auto& x : v.values) x /= v.norm;
        v.norm = 1.0;
        vecs.push_back(std::move(v));
    }
    // independent accumulation in reversed order with long doubles
    long double sum = 0;
    int count = 0;
    for (int i = 19; i >= 0; --i) {
        for (int j = i - 1; j >= 0; --j) {
            long double sq = 0;
            for (int d = 23; d >= 0; --d) {
                long double diff = vecs[i].values[d] - vecs[j].values[d];
                sq += diff * diff;
            }
            sum += std::sqrt(static_cast<double>(sq));
            ++count;
        }
    }
    double expected = static_cast<double>(sum / count);
    EXPECT_NEAR(mean_pairwise_l2(vecs), expected, 1e-12);
}

TEST(PairwiseL2Test, DimensionMismatchRejected) {
    EmbeddingVector a{{1, 0}, 1.0};
    EmbeddingVector b{{1, 0, 0}, 1.0};
    EXPECT_THROW(mean_pairwise_l2({a, b}), ValidationError);
}

// ------------------------------------------------------------- similarity

TEST(SimilarityReportTest, IdentityPairsMeanOne) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 20; ++i) {
        std::string text = "body text number " + std::to_string(i) + " with words";
        pairs.emplace_back(text, text);
    }
    auto report = similarity_report(pairs, hashed_provider(tok, 512, 3));
    EXPECT_NEAR(report.mean, 1.0, 1e-9);
    EXPECT_NEAR(report.stddev, 0.0, 1e-9);
    EXPECT_EQ(report.pair_count, 20u);
    EXPECT_EQ(report.histogram.back(), 20u);  // cosine 1.0 lands in the last bin
}

TEST(SimilarityReportTest, RandomPairingScoresBelowIdentity) {
    std::vector<std::string> texts;
    for (int i = 0; i < 30; ++i) {
        std::string t;
        for (int w = 0; w < 10; ++w) t += "v" + std::to_string(i * 31 + w) + " ";
        texts.push_back(t);
    }
    std::vector<std::pair<std::string, std::string>> identity, shifted;
    for (int i = 0; i < 30; ++i) {
        identity.emplace_back(texts[i], texts[i]);
        shifted.emplace_back(texts[i], texts[(i + 1) % 30]);
    }
    auto provider = hashed_provider(tok, 1024, 9);
    auto id_report = similarity_report(identity, provider);
    auto rand_report = similarity_report(shifted, provider);
    EXPECT_LT(rand_report.mean, id_report.mean);
}

TEST(SimilarityReportTest, MeanMatchesDotProductOracle) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 1500; ++i) {
        std::string a = "common core words c" + std::to_string(i % 40) + " d" +
                        std::to_string(i % 17) + " e" + std::to_string(i % 5);
        std::string b = "common core words c" + std::to_string((i + 1) % 40) + " d" +
                        std::to_string(i % 17) + " f" + std::to_string(i % 7);
        pairs.emplace_back(a, b);
    }
    auto provider = hashed_provider(tok, 1024, 21);
    auto report = similarity_report(pairs, provider);

    long double oracle_sum = 0;
    std::size_t n = 0;
    for (const auto& [a, b] : pairs) {
        auto va = provider(a);
        auto vb = provider(b);
        if (va.norm == 0 || vb.norm == 0) continue;
        long double dot = 0;
        for (std::size_t d = 0; d < va.values.size(); ++d) dot += va.values[d] * vb.values[d];
        oracle_sum += dot;
        ++n;
    }
    double oracle_mean = static_cast<double>(oracle_sum / n);
    EXPECT_NEAR(report.mean, oracle_mean, 1e-9);
    EXPECT_EQ(report.pair_count, n);
}

TEST(SimilarityReportTest, ZeroNormPairsExcludedAndCounted) {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"good pair of words", "good pair of words"},
        {"single", "good pair of words"},  // left side has no bigrams
    };
    auto report = similarity_report(pairs, hashed_provider(tok, 128, 4));
    EXPECT_EQ(report.pair_count, 1u);
    EXPECT_EQ(report.excluded, 1u);
}

TEST(SimilarityReportTest, PercentilesMonotoneAndHistogramSums) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 200; ++i) {
        std::string a = "w" + std::to_string(i % 13) + " x" + std::to_string(i % 7) + " y z";
        std::string b = "w" + std::to_string(i % 11) + " x" + std::to_string(i % 5) + " y z";
        pairs.emplace_back(a, b);
    }
    auto report = similarity_report(pairs, hashed_provider(tok, 256, 8));
    EXPECT_LE(report.p5, report.p50);
    EXPECT_LE(report.p50, report.p95);
    EXPECT_GE(report.mean, -1.0);
    EXPECT_LE(report.mean, 1.0);
    std::uint64_t total = 0;
    for (auto c : report.histogram) total += c;
    EXPECT_EQ(total, report.pair_count);
    EXPECT_NE(report.histogram_csv().find("bin_lo,bin_hi,count"), std::string::npos);
}

// -------------------------------------------------- directional sanity check

TEST(DirectionTest, RemovingSharedBoilerplateLowersRougeKeepsEntropy) {
    // ~30% of each document is identical boilerplate
    std::string boiler = "subscribe to our newsletter follow us on social media click here";
    std::vector<Document> raw, cleaned;
    for (int i = 0; i < 40; ++i) {
        std::string unique;
        for (int w = 0; w < 26; ++w) {
            unique += "u" + std::to_string(i * 131 + w * 7) + " ";
        }
        raw.push_back(doc("d" + std::to_string(i), unique + boiler));
        cleaned.push_back(doc("d" + std::to_string(i), unique));
    }
    auto rouge_raw = self_rouge2(raw, tok, 10, 42).value;
    auto rouge_cleaned = self_rouge2(cleaned, tok, 10, 42).value;
    EXPECT_LT(rouge_cleaned, rouge_raw);  // strictly more distinct

    auto ent_raw = shannon_entropy(TokenDistribution::from_docs(raw, tok));
    auto ent_cleaned = shannon_entropy(TokenDistribution::from_docs(cleaned, tok));
    EXPECT_GE(ent_cleaned, ent_raw);  // vocabulary no less balanced
}
