#include "evoclean/corpus.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "evoclean/errors.hpp"
#include "test_util.hpp"

using namespace evoclean;
using namespace evoclean::testutil;

namespace {

// Independent transcription of the decimal-code bands, for the exhaustive
// sweep. Deliberately structured differently from the production table.
Domain oracle_domain(int code) {
    if (code <= 9) return Domain::computer_science;
    if (code >= 500 && code <= 519) return Domain::mathematics;
    if (code >= 610 && code <= 619) return Domain::medicine;

    bool stem = (code >= 355 && code <= 359)      // military science
                || (code >= 520 && code <= 609)   // astronomy .. engineering (610 is medicine)
                || (code >= 620 && code <= 639)   // engineering subfields, agriculture
                || (code >= 660 && code <= 699)   // chemical eng, manufacturing, construction
                || (code >= 910 && code <= 919);  // geography
    return stem ? Domain::other_stem : Domain::human_social;
}

}  // namespace

TEST(MapFdc, SpotRowsFromTheTaxonomyTable) {
    EXPECT_EQ(map_fdc(5), Domain::computer_science);
    EXPECT_EQ(map_fdc(515), Domain::mathematics);
    EXPECT_EQ(map_fdc(617), Domain::medicine);
    EXPECT_EQ(map_fdc(535), Domain::other_stem);
    EXPECT_EQ(map_fdc(945), Domain::human_social);
}

TEST(MapFdc, Code610ConflictGoesToMedicine) {
    EXPECT_EQ(map_fdc(609), Domain::other_stem);
    EXPECT_EQ(map_fdc(610), Domain::medicine);
    EXPECT_EQ(map_fdc(620), Domain::other_stem);
}

TEST(MapFdc, ExhaustiveSweepMatchesOracle) {
    for (int code = 0; code <= 999; ++code) {
        EXPECT_EQ(map_fdc(code), oracle_domain(code)) << "code " << code;
    }
}

TEST(MapFdc, TableCoversRangeWithoutOverlap) {
    std::map<int, int> hits;
    for (const auto& r : fdc_table()) {
        ASSERT_LE(r.lo, r.hi);
        for (int c = r.lo; c <= r.hi; ++c) hits[c]++;
    }
    for (int c = 0; c <= 999; ++c) {
        EXPECT_EQ(hits[c], 1) << "code " << c;
    }
}

TEST(MapFdc, OutOfRangeRejected) {
    EXPECT_THROW(map_fdc(-1), CorpusError);
    EXPECT_THROW(map_fdc(1000), CorpusError);
}

TEST(AssignCategory, UsesMapsAndFdc) {
    Document doc;
    doc.id = "a";
    doc.fdc_code = 612;
    doc.quality = "High";
    doc.doc_type = "Academic Writing";
    auto key = assign_category(doc, default_quality_map(), default_doc_type_map());
    EXPECT_EQ(key.content_type, ContentType::academic);
    EXPECT_EQ(key.quality, QualityTier::high);
    EXPECT_EQ(key.domain, Domain::medicine);

    doc.fdc_code = 515;
    doc.quality = "Medium";
    key = assign_category(doc, default_quality_map(), default_doc_type_map());
    EXPECT_EQ(key.quality, QualityTier::not_high);
    EXPECT_EQ(key.domain, Domain::mathematics);
}

TEST(AssignCategory, UnmappedLabelsAreNamed) {
    Document doc;
    doc.id = "a";
    doc.fdc_code = 612;
    doc.quality = "Medium-High";
    doc.doc_type = "Academic Writing";
    LabelMap quality_map = {{"High", "high"}};  // no entry for Medium-High
    try {
        assign_category(doc, quality_map, default_doc_type_map());
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find("Medium-High"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("unmapped quality"), std::string::npos);
    }

    doc.quality = "High";
    doc.fdc_code.reset();
    EXPECT_THROW(assign_category(doc, quality_map, default_doc_type_map()), CorpusError);
}

class LoadJsonlTest : public TempDirTest {};

TEST_F(LoadJsonlTest, ThreeValidLinesSameCategory) {
    spit(path("c.jsonl"), corpus_line("a", "one two three") + corpus_line("b", "four five") +
                              corpus_line("c", "six"));
    WhitespaceTokenizer tok;
    auto store = load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
    EXPECT_EQ(store.total_docs, 3u);
    EXPECT_EQ(store.categories.size(), 1u);
    CategoryKey key{ContentType::academic, QualityTier::high, Domain::medicine};
    EXPECT_EQ(store.doc_count(key), 3u);
    EXPECT_EQ(store.token_count(key), 6u);
    EXPECT_EQ(store.docs(key)[0].id, "a");  // order preserving
    EXPECT_EQ(store.docs(key)[2].id, "c");
}

TEST_F(LoadJsonlTest, EmptyTextDroppedAndCounted) {
    spit(path("c.jsonl"), corpus_line("a", "one two") + corpus_line("b", ""));
    WhitespaceTokenizer tok;
    auto store = load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
    EXPECT_EQ(store.total_docs, 1u);
    EXPECT_EQ(store.dropped_empty, 1u);
}

TEST_F(LoadJsonlTest, DuplicateIdNamed) {
    spit(path("c.jsonl"), corpus_line("a1", "x y") + corpus_line("a1", "z w"));
    WhitespaceTokenizer tok;
    try {
        load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_EQ(std::string(e.what()), "duplicate id a1");
    }
}

TEST_F(LoadJsonlTest, MalformedLineNamesLineNumber) {
    spit(path("c.jsonl"), corpus_line("a", "x y") + "{not json\n");
    WhitespaceTokenizer tok;
    try {
        load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST_F(LoadJsonlTest, PartitionSumsToLoadedMinusDropped) {
    std::string data;
    int fdcs[] = {5, 515, 612, 535, 945};
    for (int i = 0; i < 40; ++i) {
        data += corpus_line("d" + std::to_string(i), i % 7 == 3 ? "" : "tok a b c",
                            fdcs[i % 5], "Academic Writing", i % 2 ? "High" : "Low");
    }
    spit(path("c.jsonl"), data);
    WhitespaceTokenizer tok;
    auto store = load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
    std::size_t sum = 0;
    for (const auto& [k, docs] : store.categories) sum += docs.size();
    EXPECT_EQ(sum + store.dropped_empty, 40u);
    EXPECT_EQ(sum, store.total_docs);
}

TEST_F(LoadJsonlTest, TokenTotalsStableAcrossReload) {
    spit(path("c.jsonl"), synthetic_corpus(50, 9));
    WhitespaceTokenizer tok;
    auto s1 = load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
    auto s2 = load_jsonl(path("c.jsonl"), tok, default_quality_map(), default_doc_type_map());
    for (const auto& [key, docs] : s1.categories) {
        EXPECT_EQ(s1.token_count(key), s2.token_count(key));
    }
}

class SamplerTest : public TempDirTest {};

TEST_F(SamplerTest, DrawsWithinEpochAreDisjoint) {
    auto store = load_synthetic(dir_, 10);
    CategoryKey key{ContentType::academic, QualityTier::high, Domain::medicine};
    CategorySampler sampler(key, 7, store.docs(key).size());
    auto a = sampler.draw(store, 4);
    auto b = sampler.draw(store, 4);
    std::set<std::string> ids;
    for (const auto& d : a) ids.insert(d.id);
    for (const auto& d : b) ids.insert(d.id);
    EXPECT_EQ(ids.size(), 8u);
}

TEST_F(SamplerTest, SameSeedSameCorpusReplaysIdentically) {
    auto store = load_synthetic(dir_, 25);
    CategoryKey key{ContentType::academic, QualityTier::high, Domain::medicine};
    CategorySampler s1(key, 99, store.docs(key).size());
    CategorySampler s2(key, 99, store.docs(key).size());
    for (int round = 0; round < 12; ++round) {  // crosses epoch boundaries
        auto a = s1.draw(store, 7);
        auto b = s2.draw(store, 7);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].id, b[i].id);
    }
}

TEST_F(SamplerTest, ThirtyDrawsOfFiveHundredCoverEveryDocFourteenToFifteenTimes) {
    auto store = load_synthetic(dir_, 1000, 3);
    CategoryKey key{ContentType::academic, QualityTier::high, Domain::medicine};
    CategorySampler sampler(key, 4242, store.docs(key).size());
    std::map<std::string, int> counts;
    for (int round = 0; round < 30; ++round) {
        for (const auto& d : sampler.draw(store, 500)) counts[d.id]++;
    }
    ASSERT_EQ(counts.size(), 1000u);
    long total = 0;
    for (const auto& [id, c] : counts) {
        EXPECT_GE(c, 14) << id;
        EXPECT_LE(c, 15) << id;
        total += c;
    }
    EXPECT_EQ(total, 15000);
}

TEST_F(SamplerTest, BudgetLargerThanCategoryRejected) {
    auto store = load_synthetic(dir_, 5);
    CategoryKey key{ContentType::academic, QualityTier::high, Domain::medicine};
    CategorySampler sampler(key, 1, store.docs(key).size());
    EXPECT_THROW(sampler.draw(store, 6), CorpusError);
}

TEST_F(SamplerTest, RestoreReproducesPosition) {
    auto store = load_synthetic(dir_, 30);
    CategoryKey key{ContentType::academic, QualityTier::high, Domain::medicine};
    CategorySampler s1(key, 5, store.docs(key).size());
    for (int i = 0; i < 7; ++i) s1.draw(store, 9);  // wanders across epochs

    CategorySampler s2(key, 5, store.docs(key).size());
    s2.restore(s1.epoch(), s1.cursor());
    auto a = s1.draw(store, 9);
    auto b = s2.draw(store, 9);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].id, b[i].id);
}
