#include "evoclean/corpus.hpp"

#include <set>

#include "evoclean/errors.hpp"
#include "evoclean/jsonio.hpp"
#include "evoclean/rng.hpp"

namespace evoclean {

namespace {

constexpr Domain HS = Domain::human_social;
constexpr Domain MA = Domain::mathematics;
constexpr Domain CS = Domain::computer_science;
constexpr Domain ME = Domain::medicine;
constexpr Domain OS = Domain::other_stem;

// Decimal-code subject bands merged into the five working domains. 610 sits
// in the medicine band; engineering keeps 600-609 plus its scattered codes.
const std::vector<FdcRange> kFdcTable = {
    {0, 9, CS, "computer_science"},
    {10, 99, HS, "management"},
    {100, 129, HS, "philosophy"},
    {130, 139, HS, "psychology"},
    {140, 149, HS, "philosophy"},
    {150, 159, HS, "psychology"},
    {160, 199, HS, "philosophy"},
    {200, 299, HS, "religion"},
    {300, 319, HS, "sociology"},
    {320, 329, HS, "political_science"},
    {330, 339, HS, "economics"},
    {340, 349, HS, "law"},
    {350, 354, HS, "management"},
    {355, 359, OS, "military_science"},
    {360, 369, HS, "sociology"},
    {370, 379, HS, "education"},
    {380, 399, HS, "sociology"},
    {400, 499, HS, "linguistics"},
    {500, 519, MA, "mathematics"},
    {520, 529, OS, "natural_sciences_astronomy"},
    {530, 539, OS, "physics"},
    {540, 549, OS, "chemistry"},
    {550, 559, OS, "natural_sciences_earth"},
    {560, 569, OS, "natural_sciences_paleontology"},
    {570, 579, OS, "biology"},
    {580, 589, OS, "natural_sciences_botany"},
    {590, 599, OS, "natural_sciences_zoology"},
    {600, 609, OS, "engineering"},
    {610, 619, ME, "medicine"},
    {620, 621, OS, "engineering"},
    {622, 622, OS, "engineering_mining"},
    {623, 623, OS, "engineering_maritime"},
    {624, 624, OS, "engineering_civil"},
    {625, 625, OS, "engineering_railway"},
    {626, 626, OS, "engineering"},
    {627, 627, OS, "engineering_water"},
    {628, 628, OS, "engineering_environment"},
    {629, 629, OS, "engineering"},
    {630, 639, OS, "agriculture"},
    {640, 659, HS, "management"},
    {660, 669, OS, "engineering_chemical"},
    {670, 689, OS, "manufacturing"},
    {690, 699, OS, "construction"},
    {700, 709, HS, "art_fine_arts"},
    {710, 729, HS, "art_architecture"},
    {730, 739, HS, "art_artifacts"},
    {740, 749, HS, "art_design"},
    {750, 769, HS, "art_fine_arts"},
    {770, 779, HS, "art_photography"},
    {780, 789, HS, "art_music"},
    {790, 799, HS, "art_sports"},
    {800, 899, HS, "literature"},
    {900, 909, HS, "history"},
    {910, 919, OS, "natural_sciences_geography"},
    {920, 999, HS, "history"},
};

}  // namespace

const std::vector<FdcRange>& fdc_table() { return kFdcTable; }

Domain map_fdc(int code) {
    if (code < 0 || code > 999) {
        throw CorpusError("fdc code out of range [0,999]: " + std::to_string(code));
    }
    for (const auto& r : kFdcTable) {
        if (code >= r.lo && code <= r.hi) return r.domain;
    }
    throw InternalError("fdc table gap at code " + std::to_string(code));
}

CategoryKey assign_category(const Document& doc, const LabelMap& quality_map,
                            const LabelMap& doc_type_map) {
    if (!doc.fdc_code) {
        throw CorpusError("document " + doc.id + ": missing fdc code");
    }
    auto qit = quality_map.find(doc.quality);
    if (qit == quality_map.end()) {
        throw CorpusError("unmapped quality label \"" + doc.quality + "\" (document " + doc.id +
                          ")");
    }
    auto q = quality_tier_from_string(qit->second);
    if (!q) {
        throw ConfigError("quality_map value must be high|not_high, got \"" + qit->second + "\"");
    }
    auto tit = doc_type_map.find(doc.doc_type);
    if (tit == doc_type_map.end()) {
        throw CorpusError("unmapped doc_type label \"" + doc.doc_type + "\" (document " + doc.id +
                          ")");
    }
    auto ct = content_type_from_string(tit->second);
    if (!ct) {
        throw ConfigError("doc_type_map value must name a content type, got \"" + tit->second +
                          "\"");
    }
    return CategoryKey{*ct, *q, map_fdc(*doc.fdc_code)};
}

std::uint64_t CorpusStore::doc_count(const CategoryKey& key) const {
    auto it = categories.find(key);
    return it == categories.end() ? 0 : it->second.size();
}

std::uint64_t CorpusStore::token_count(const CategoryKey& key) const {
    auto it = categories.find(key);
    if (it == categories.end()) return 0;
    std::uint64_t total = 0;
    for (const auto& d : it->second) total += d.token_count;
    return total;
}

const std::vector<Document>& CorpusStore::docs(const CategoryKey& key) const {
    auto it = categories.find(key);
    if (it == categories.end()) {
        throw CorpusError("no such category: " + key.slug());
    }
    return it->second;
}

CorpusStore load_jsonl(const std::filesystem::path& path, const Tokenizer& tok,
                       const LabelMap& quality_map, const LabelMap& doc_type_map) {
    CorpusStore store;
    store.tokenizer_name = tok.name();
    std::set<std::string> seen_ids;

    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        if (!obj.contains("id") || !obj.contains("text")) {
            throw CorpusError("line " + std::to_string(line_no) + ": missing id or text");
        }
        Document doc;
        doc.id = obj.at("id").get<std::string>();
        doc.text = obj.at("text").get<std::string>();
        if (!seen_ids.insert(doc.id).second) {
            throw CorpusError("duplicate id " + doc.id);
        }
        if (doc.text.empty()) {
            ++store.dropped_empty;
            return;
        }
        if (obj.contains("meta")) {
            const auto& meta = obj.at("meta");
            if (meta.contains("fdc") && !meta.at("fdc").is_null()) {
                doc.fdc_code = meta.at("fdc").get<int>();
            }
            if (meta.contains("doc_type")) doc.doc_type = meta.at("doc_type").get<std::string>();
            if (meta.contains("quality")) doc.quality = meta.at("quality").get<std::string>();
        }
        doc.token_count = tok.count(doc.text);
        CategoryKey key = assign_category(doc, quality_map, doc_type_map);
        store.categories[key].push_back(std::move(doc));
        ++store.total_docs;
    });
    return store;
}

std::vector<Document> read_documents_jsonl(const std::filesystem::path& path,
                                           const Tokenizer& tok) {
    std::vector<Document> docs;
    std::set<std::string> seen_ids;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        if (!obj.contains("id") || !obj.contains("text")) {
            throw CorpusError("line " + std::to_string(line_no) + ": missing id or text");
        }
        Document doc;
        doc.id = obj.at("id").get<std::string>();
        doc.text = obj.at("text").get<std::string>();
        if (!seen_ids.insert(doc.id).second) throw CorpusError("duplicate id " + doc.id);
        if (obj.contains("meta")) {
            const auto& meta = obj.at("meta");
            if (meta.contains("fdc") && !meta.at("fdc").is_null()) {
                doc.fdc_code = meta.at("fdc").get<int>();
            }
            if (meta.contains("doc_type")) doc.doc_type = meta.at("doc_type").get<std::string>();
            if (meta.contains("quality")) doc.quality = meta.at("quality").get<std::string>();
        }
        doc.token_count = tok.count(doc.text);
        docs.push_back(std::move(doc));
    });
    return docs;
}

CategorySampler::CategorySampler(CategoryKey category, std::uint64_t seed,
                                 std::size_t category_size)
    : category_(std::move(category)), seed_(seed), size_(category_size) {
    if (size_ == 0) throw CorpusError("empty category: " + category_.slug());
    reshuffle();
}

void CategorySampler::reshuffle() {
    permutation_.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) permutation_[i] = i;
    Rng rng(seed_ + epoch_);
    rng.shuffle(permutation_);
    cursor_ = 0;
}

std::vector<std::size_t> CategorySampler::draw_indices(std::size_t n) {
    if (n == 0) throw ConfigError("sample size must be >= 1");
    if (n > size_) {
        throw CorpusError("category " + category_.slug() + " too small for budget: " +
                          std::to_string(size_) + " < " + std::to_string(n));
    }
    std::vector<std::size_t> out;
    out.reserve(n);
    while (out.size() < n) {
        if (cursor_ == size_) {
            ++epoch_;
            reshuffle();
            if (on_epoch) on_epoch(epoch_);
        }
        out.push_back(permutation_[cursor_++]);
    }
    return out;
}

void CategorySampler::restore(std::uint64_t epoch, std::size_t cursor) {
    if (cursor > size_) throw InternalError("sampler cursor beyond category size");
    epoch_ = epoch;
    reshuffle();
    cursor_ = cursor;
}

std::vector<Document> CategorySampler::draw(const CorpusStore& store, std::size_t n) {
    const auto& docs = store.docs(category_);
    if (docs.size() != size_) {
        throw InternalError("sampler bound to a different category size");
    }
    std::vector<Document> out;
    out.reserve(n);
    for (auto idx : draw_indices(n)) out.push_back(docs[idx]);
    return out;
}

}  // namespace evoclean
