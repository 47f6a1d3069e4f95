#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "evoclean/tokenizer.hpp"
#include "evoclean/types.hpp"

namespace evoclean {

// One row of the decimal-code mapping table. The table is total over 0-999;
// `label` keeps the fine-grained subject name for diagnostics.
struct FdcRange {
    int lo;
    int hi;
    Domain domain;
    const char* label;
};

// The full mapping table, non-overlapping and covering 0-999. Code 610 maps
// to medicine; the engineering band is 600-609 plus its other listed ranges.
const std::vector<FdcRange>& fdc_table();

// Total over [0, 999]; out-of-range codes raise CorpusError.
Domain map_fdc(int code);

using LabelMap = std::map<std::string, std::string>;

// quality/doc-type label maps are config inputs; unmapped labels are errors.
CategoryKey assign_category(const Document& doc, const LabelMap& quality_map,
                            const LabelMap& doc_type_map);

// Immutable after load; safe to share across threads.
struct CorpusStore {
    std::map<CategoryKey, std::vector<Document>> categories;
    std::size_t total_docs = 0;
    std::size_t dropped_empty = 0;
    std::string tokenizer_name;

    std::uint64_t doc_count(const CategoryKey& key) const;
    std::uint64_t token_count(const CategoryKey& key) const;
    const std::vector<Document>& docs(const CategoryKey& key) const;
};

// Input line shape: {"id": str, "text": str, "meta": {"fdc": int|null,
// "doc_type": str, "quality": str}}. Empty-text lines are dropped and
// counted; duplicate ids and malformed lines are errors naming the culprit.
CorpusStore load_jsonl(const std::filesystem::path& path, const Tokenizer& tok,
                       const LabelMap& quality_map, const LabelMap& doc_type_map);

// id/text reader without categorization, for metrics inputs. Order
// preserving; duplicate ids are errors; meta is kept when present.
std::vector<Document> read_documents_jsonl(const std::filesystem::path& path,
                                           const Tokenizer& tok);

// Fresh, seeded, non-overlapping draws from one category. Draws inside one
// permutation epoch are disjoint; on exhaustion the permutation is rebuilt
// with seed+epoch and the cursor continues.
class CategorySampler {
public:
    CategorySampler(CategoryKey category, std::uint64_t seed, std::size_t category_size);

    // n documents starting at the cursor. n must not exceed the category size.
    std::vector<std::size_t> draw_indices(std::size_t n);

    std::vector<Document> draw(const CorpusStore& store, std::size_t n);

    // Rebuilds the permutation for `epoch` and positions the cursor; used
    // when resuming a run from its manifest.
    void restore(std::uint64_t epoch, std::size_t cursor);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t epoch() const { return epoch_; }
    std::size_t cursor() const { return cursor_; }

    // Invoked at every reshuffle with the new epoch number.
    std::function<void(std::uint64_t)> on_epoch;

private:
    void reshuffle();

    CategoryKey category_;
    std::uint64_t seed_;
    std::size_t size_;
    std::uint64_t epoch_ = 0;
    std::size_t cursor_ = 0;
    std::vector<std::size_t> permutation_;
};

}  // namespace evoclean
