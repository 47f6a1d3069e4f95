#include "evoclean/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "evoclean/errors.hpp"
#include "evoclean/hash.hpp"
#include "evoclean/rng.hpp"

namespace evoclean {

namespace {

using BigramCounts = std::unordered_map<std::string, std::uint64_t>;

BigramCounts bigram_multiset(const std::vector<std::string>& tokens) {
    BigramCounts counts;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        counts[tokens[i] + '\x1f' + tokens[i + 1]] += 1;
    }
    return counts;
}

std::uint64_t multiset_size(const BigramCounts& m) {
    std::uint64_t total = 0;
    for (const auto& [k, v] : m) {
        (void)k;
        total += v;
    }
    return total;
}

double bigram_f1(const BigramCounts& a, const BigramCounts& b) {
    std::uint64_t na = multiset_size(a);
    std::uint64_t nb = multiset_size(b);
    if (na == 0 || nb == 0) return 0.0;
    std::uint64_t overlap = 0;
    const BigramCounts& small = a.size() <= b.size() ? a : b;
    const BigramCounts& large = a.size() <= b.size() ? b : a;
    for (const auto& [gram, count] : small) {
        auto it = large.find(gram);
        if (it != large.end()) overlap += std::min(count, it->second);
    }
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(na + nb);
}

double percentile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(rank);
    double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

void TokenDistribution::add(const std::string& token, std::uint64_t n) {
    if (n == 0) return;
    counts[token] += n;
    total += n;
}

TokenDistribution TokenDistribution::from_docs(const std::vector<Document>& docs,
                                               const Tokenizer& tok) {
    TokenDistribution dist;
    for (const auto& d : docs) {
        for (auto& t : tok.tokenize(d.text)) dist.add(t);
    }
    return dist;
}

double shannon_entropy(const TokenDistribution& dist) {
    if (dist.total == 0) throw ValidationError("entropy of an empty distribution");
    double h = 0.0;
    double total = static_cast<double>(dist.total);
    for (const auto& [token, count] : dist.counts) {
        (void)token;
        if (count == 0) continue;
        double p = static_cast<double>(count) / total;
        h -= p * std::log2(p);
    }
    return h;
}

RougeResult self_rouge2(const std::vector<Document>& docs, const Tokenizer& tok,
                        std::size_t refs_per_doc, std::uint64_t seed) {
    if (docs.size() < 2) throw ValidationError("self_rouge2 needs at least 2 documents");
    if (refs_per_doc < 1) throw ValidationError("refs_per_doc must be >= 1");

    // Candidates ordered by id so the metric ignores input order.
    std::vector<std::size_t> by_id(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });

    std::vector<BigramCounts> grams(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        grams[i] = bigram_multiset(tok.tokenize(docs[i].text));
    }

    RougeResult result;
    double sum = 0.0;
    for (std::size_t pos = 0; pos < by_id.size(); ++pos) {
        std::size_t di = by_id[pos];
        if (grams[di].empty()) {
            ++result.short_docs;
            continue;  // contributes 0
        }
        Rng rng(seed ^ fnv1a64(docs[di].id));
        std::size_t others = by_id.size() - 1;
        std::size_t k = std::min(refs_per_doc, others);
        double best = 0.0;
        for (auto ref_pos : rng.sample_indices(others, k)) {
            // positions skip the document itself
            std::size_t actual = ref_pos < pos ? ref_pos : ref_pos + 1;
            best = std::max(best, bigram_f1(grams[di], grams[by_id[actual]]));
        }
        sum += best;
    }
    result.value = sum / static_cast<double>(docs.size());
    return result;
}

EmbeddingVector hash_embed(std::string_view text, const Tokenizer& tok, std::size_t dimension,
                           std::uint64_t seed) {
    if (dimension < 2) throw ValidationError("embedding dimension must be >= 2");
    EmbeddingVector v;
    v.values.assign(dimension, 0.0);
    auto tokens = tok.tokenize(text);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        std::string gram = tokens[i] + '\x1f' + tokens[i + 1];
        std::uint64_t h = fnv1a64(gram, fnv1a64_u64(seed));
        std::size_t bucket = h % dimension;
        double sign = (h >> 63) ? -1.0 : 1.0;
        v.values[bucket] += sign;
    }
    double sq = 0.0;
    for (double x : v.values) sq += x * x;
    v.norm = std::sqrt(sq);
    if (v.norm > 0) {
        for (double& x : v.values) x /= v.norm;
    }
    return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size()) {
        throw ValidationError("embedding dimension mismatch");
    }
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double mean_pairwise_l2(const std::vector<EmbeddingVector>& vecs) {
    if (vecs.size() < 2) throw ValidationError("mean_pairwise_l2 needs at least 2 vectors");
    const std::size_t dim = vecs[0].values.size();
    for (const auto& v : vecs) {
        if (v.values.size() != dim) throw ValidationError("embedding dimension mismatch");
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        for (std::size_t j = i + 1; j < vecs.size(); ++j) {
            double sq = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = vecs[i].values[d] - vecs[j].values[d];
                sq += diff * diff;
            }
            sum += std::sqrt(sq);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

EmbedProvider hashed_provider(const Tokenizer& tok, std::size_t dimension, std::uint64_t seed) {
    return [&tok, dimension, seed](std::string_view text) {
        return hash_embed(text, tok, dimension, seed);
    };
}

std::string SimilarityReport::histogram_csv() const {
    std::string out = "bin_lo,bin_hi,count\n";
    char buf[64];
    for (std::size_t i = 0; i < histogram.size(); ++i) {
        double lo = -1.0 + 0.01 * static_cast<double>(i);
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%llu\n", lo, lo + 0.01,
                      static_cast<unsigned long long>(histogram[i]));
        out += buf;
    }
    return out;
}

SimilarityReport similarity_report(const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const EmbedProvider& provider) {
    if (pairs.empty()) throw ValidationError("similarity_report needs at least one pair");
    SimilarityReport report;
    std::vector<double> sims;
    sims.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        EmbeddingVector va = provider(a);
        EmbeddingVector vb = provider(b);
        if (va.norm == 0.0 || vb.norm == 0.0) {
            ++report.excluded;
            continue;
        }
        double s = cosine(va, vb);
        sims.push_back(s);
        auto bin = static_cast<long>(std::floor((s + 1.0) / 0.01));
        bin = std::clamp<long>(bin, 0, 199);
        ++report.histogram[static_cast<std::size_t>(bin)];
    }
    report.pair_count = sims.size();
    if (sims.empty()) return report;

    double sum = 0.0;
    for (double s : sims) sum += s;
    report.mean = sum / static_cast<double>(sims.size());
    double var = 0.0;
    for (double s : sims) var += (s - report.mean) * (s - report.mean);
    report.stddev = std::sqrt(var / static_cast<double>(sims.size()));

    std::sort(sims.begin(), sims.end());
    report.p5 = percentile(sims, 5);
    report.p50 = percentile(sims, 50);
    report.p95 = percentile(sims, 95);
    return report;
}

}  // namespace evoclean
