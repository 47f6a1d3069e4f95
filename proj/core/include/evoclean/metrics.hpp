#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evoclean/tokenizer.hpp"
#include "evoclean/types.hpp"

namespace evoclean {

struct TokenDistribution {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;

    void add(const std::string& token, std::uint64_t n = 1);
    static TokenDistribution from_docs(const std::vector<Document>& docs, const Tokenizer& tok);
};

// Entropy in bits of the token frequency distribution.
double shannon_entropy(const TokenDistribution& dist);

struct RougeResult {
    double value = 0.0;      // mean over documents of max bigram F1 vs sampled references
    std::size_t short_docs = 0;  // documents with <2 tokens; they contribute 0
};

// Per document: sample refs_per_doc other documents without replacement
// (per-document rng keyed by seed and doc id, so the result is invariant
// under corpus reordering), take the max ROUGE-2 F1 over references, then
// average over documents. Lower = more distinct documents.
RougeResult self_rouge2(const std::vector<Document>& docs, const Tokenizer& tok,
                        std::size_t refs_per_doc, std::uint64_t seed);

struct EmbeddingVector {
    std::vector<double> values;
    double norm = 0.0;  // zero flags an un-embeddable text (<2 tokens)
};

// Bag-of-token-bigrams with sign hashing into `dimension` buckets, then
// L2-normalized. Deterministic across platforms.
EmbeddingVector hash_embed(std::string_view text, const Tokenizer& tok, std::size_t dimension,
                           std::uint64_t seed);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Mean Euclidean distance over all unordered pairs.
double mean_pairwise_l2(const std::vector<EmbeddingVector>& vecs);

using EmbedProvider = std::function<EmbeddingVector(std::string_view)>;

EmbedProvider hashed_provider(const Tokenizer& tok, std::size_t dimension, std::uint64_t seed);

struct SimilarityReport {
    std::size_t pair_count = 0;
    std::size_t excluded = 0;  // zero-norm embeddings
    double mean = 0.0;
    double stddev = 0.0;
    double p5 = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    // 200 bins of width 0.01 over [-1, 1]; values at exactly 1.0 land in the
    // last bin.
    std::vector<std::uint64_t> histogram = std::vector<std::uint64_t>(200, 0);

    std::string histogram_csv() const;
};

SimilarityReport similarity_report(const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const EmbedProvider& provider);

}  // namespace evoclean
