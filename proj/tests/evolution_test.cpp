#include "evoclean/evolution.hpp"

#include <gtest/gtest.h>

#include "evoclean/errors.hpp"
#include "test_util.hpp"

using namespace evoclean;
using namespace evoclean::testutil;

namespace {

CategoryKey test_key() {
    return CategoryKey{ContentType::academic, QualityTier::high, Domain::medicine};
}

}  // namespace

class EvolutionTest : public TempDirTest {};

TEST_F(EvolutionTest, InitializeSeedsThePool) {
    auto store = load_synthetic(dir_, 50);
    RunScript script;
    script.iterations = 1;
    script.scores = {6.0};
    script.observer_issues = 5;
    script.clean_docs = 20;
    script.judge_pairs = 5;
    auto fixtures = make_run_fixtures(script);

    RunConfig rc = test_run_config("r1", dir_ / "runs", 1, 10, 20, 5);
    EvolutionRun run(rc, store, backends_from(fixtures));
    run.run();

    const auto& pool = run.experiences();
    EXPECT_GE(pool.entries.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(pool.entries[i].iteration_added, 0u);
        EXPECT_EQ(pool.entries[i].source, ExperienceSource::observer);
    }
    EXPECT_TRUE(std::filesystem::exists(run.category_dir() / "transcripts" /
                                        "init_observer.jsonl"));
}

TEST_F(EvolutionTest, EmptyCategoryIsACorpusError) {
    auto store = load_synthetic(dir_, 5);
    RunConfig rc = test_run_config("r1", dir_ / "runs", 1, /*observe=*/10, 5, 2);
    auto fixtures = make_run_fixtures(RunScript{});
    EvolutionRun run(rc, store, backends_from(fixtures));
    EXPECT_THROW(run.run(), CorpusError);  // 5 docs < observe budget 10
}

TEST_F(EvolutionTest, BestPropagatesAndParentsRecorded) {
    auto store = load_synthetic(dir_, 60);
    RunScript script;
    script.iterations = 3;
    script.scores = {6.0, 5.0, 7.5};
    script.clean_docs = 20;
    script.judge_pairs = 5;
    script.judge_issue_every = 0;
    auto fixtures = make_run_fixtures(script);

    RunConfig rc = test_run_config("r1", dir_ / "runs", 3, 10, 20, 5);
    EvolutionRun run(rc, store, backends_from(fixtures));
    RunManifest manifest = run.run();

    ASSERT_EQ(manifest.reports.size(), 3u);
    EXPECT_EQ(manifest.selected_best, std::optional<std::uint64_t>(3));
    const auto& records = run.strategies().records;
    ASSERT_EQ(records.size(), 3u);
    EXPECT_FALSE(records[0].parent_iteration.has_value());
    EXPECT_EQ(records[1].parent_iteration, std::optional<std::uint64_t>(1));
    // iteration 2 scored lower, so iteration 3 still descends from 1
    EXPECT_EQ(records[2].parent_iteration, std::optional<std::uint64_t>(1));
    EXPECT_NEAR(*records[2].score, 7.5, 1e-12);
}

TEST_F(EvolutionTest, ExperiencePoolMonotone) {
    auto store = load_synthetic(dir_, 60);
    RunScript script;
    script.iterations = 4;
    script.scores = {5.0, 6.0, 6.5, 6.2};
    script.clean_docs = 10;
    script.judge_pairs = 3;
    script.judge_issue_every = 2;
    auto fixtures = make_run_fixtures(script);

    RunConfig rc = test_run_config("r1", dir_ / "runs", 4, 10, 10, 3);
    EvolutionRun run(rc, store, backends_from(fixtures));
    RunManifest manifest = run.run();

    std::size_t prev = 0;
    for (const auto& r : manifest.reports) {
        EXPECT_GE(r.experience_after, r.experience_before);
        EXPECT_GE(r.experience_before, prev);
        prev = r.experience_after;
    }
}

TEST_F(EvolutionTest, FailedIterationSkipsRecordAndContinues) {
    auto store = load_synthetic(dir_, 60);

    // Designer misbehaves on iteration 2 only: invalid JSON twice.
    RunScript script;
    script.iterations = 3;
    script.scores = {6.0, 5.0, 7.0};
    script.clean_docs = 10;
    script.judge_pairs = 3;
    script.judge_issue_every = 0;
    auto fixtures = make_run_fixtures(script);

    json designer{{"steps", json::array()}};
    auto good = [&](std::uint64_t i) {
        designer["steps"].push_back(json{
            {"tool_calls", json::array({json{{"name", "update_cleaning_prompt"},
                                             {"arguments",
                                              json{{"prompt_content", "{text}"}}}}})}});
        designer["steps"].push_back(
            json{{"content", "```json\n" + designer_final_json("{text}", i).dump() + "\n```"}});
    };
    good(1);
    designer["steps"].push_back(json{{"content", "no json at all"}});
    designer["steps"].push_back(json{{"content", "still no json"}});
    good(3);
    fixtures.designer = designer;

    // cleaner/judge fixtures must cover only iterations 1 and 3
    RunScript ok_iters = script;
    ok_iters.iterations = 2;
    ok_iters.scores = {6.0, 7.0};
    ok_iters.include_observer = false;
    auto ok_fixtures = make_run_fixtures(ok_iters);
    fixtures.cleaner = ok_fixtures.cleaner;
    fixtures.judge = ok_fixtures.judge;

    RunConfig rc = test_run_config("r1", dir_ / "runs", 3, 10, 10, 3);
    EvolutionRun run(rc, store, backends_from(fixtures));
    RunManifest manifest = run.run();

    ASSERT_EQ(manifest.reports.size(), 3u);
    EXPECT_FALSE(manifest.reports[0].failed);
    EXPECT_TRUE(manifest.reports[1].failed);
    EXPECT_FALSE(manifest.reports[2].failed);
    const auto& records = run.strategies().records;
    ASSERT_EQ(records.size(), 2u);  // iteration 2 left no record
    EXPECT_EQ(records[0].iteration, 1u);
    EXPECT_EQ(records[1].iteration, 3u);
    EXPECT_EQ(records[1].parent_iteration, std::optional<std::uint64_t>(1));
    EXPECT_EQ(manifest.selected_best, std::optional<std::uint64_t>(3));
}

TEST_F(EvolutionTest, MostlyFailedRunAborts) {
    auto store = load_synthetic(dir_, 60);
    json broken{{"steps", json::array()}};
    for (int i = 0; i < 8; ++i) broken["steps"].push_back(json{{"content", "garbage"}});

    RunScript script;
    script.iterations = 2;
    script.scores = {6.0, 6.0};
    script.clean_docs = 10;
    script.judge_pairs = 3;
    auto fixtures = make_run_fixtures(script);
    fixtures.designer = broken;

    RunConfig rc = test_run_config("r1", dir_ / "runs", 2, 10, 10, 3);
    EvolutionRun run(rc, store, backends_from(fixtures));
    EXPECT_THROW(run.run(), Error);
}

TEST_F(EvolutionTest, DeterministicAcrossIdenticalRuns) {
    auto store = load_synthetic(dir_, 80);
    RunScript script;
    script.iterations = 5;
    script.scores = {5.0, 6.5, 6.0, 7.25, 7.0};
    script.clean_docs = 20;
    script.judge_pairs = 5;
    auto fixtures = make_run_fixtures(script);

    auto run_once = [&](const std::string& root) {
        RunConfig rc = test_run_config("same-id", dir_ / root, 5, 10, 20, 5);
        EvolutionRun run(rc, store, backends_from(make_run_fixtures(script)));
        run.run();
        return run.category_dir();
    };
    auto dir_a = run_once("runs_a");
    auto dir_b = run_once("runs_b");

    EXPECT_EQ(slurp(dir_a / "manifest.json"), slurp(dir_b / "manifest.json"));
    EXPECT_EQ(slurp(dir_a / "experience_pool.json"), slurp(dir_b / "experience_pool.json"));
    EXPECT_EQ(slurp(dir_a / "strategy_pool.json"), slurp(dir_b / "strategy_pool.json"));
}

TEST_F(EvolutionTest, StopAndResumeMatchesUninterruptedRun) {
    auto store = load_synthetic(dir_, 80);
    RunScript script;
    script.iterations = 6;
    script.scores = {5.0, 6.5, 6.0, 7.25, 7.0, 6.8};
    script.clean_docs = 15;
    script.judge_pairs = 4;
    auto fixtures_full = make_run_fixtures(script);

    // uninterrupted reference
    RunConfig rc_ref = test_run_config("case", dir_ / "ref", 6, 10, 15, 4);
    EvolutionRun ref(rc_ref, store, backends_from(fixtures_full));
    ref.run();

    // phase 1: stop after iteration 3 (fixture covers everything; unused tail
    // steps are simply never requested)
    RunConfig rc1 = test_run_config("case", dir_ / "split", 6, 10, 15, 4);
    rc1.stop_after = 3;
    EvolutionRun phase1(rc1, store, backends_from(make_run_fixtures(script)));
    RunManifest m1 = phase1.run();
    ASSERT_EQ(m1.reports.size(), 3u);
    EXPECT_FALSE(m1.selected_best.has_value());

    // phase 2: resume with a tail fixture that starts at iteration 4
    RunScript tail = script;
    tail.first_iteration = 4;
    tail.iterations = 3;
    tail.include_observer = false;
    RunConfig rc2 = test_run_config("case", dir_ / "split", 6, 10, 15, 4);
    EvolutionRun phase2(rc2, store, backends_from(make_run_fixtures(tail)));
    RunManifest m2 = phase2.run();
    ASSERT_EQ(m2.reports.size(), 6u);
    EXPECT_EQ(m2.selected_best, std::optional<std::uint64_t>(4));

    EXPECT_EQ(slurp(ref.category_dir() / "manifest.json"),
              slurp(phase2.category_dir() / "manifest.json"));
    EXPECT_EQ(slurp(ref.category_dir() / "experience_pool.json"),
              slurp(phase2.category_dir() / "experience_pool.json"));
    EXPECT_EQ(slurp(ref.category_dir() / "strategy_pool.json"),
              slurp(phase2.category_dir() / "strategy_pool.json"));
}

TEST_F(EvolutionTest, DroppedDocsExcludedFromJudging) {
    auto store = load_synthetic(dir_, 60);
    RunScript script;
    script.iterations = 1;
    script.scores = {6.0};
    script.clean_docs = 10;
    script.judge_pairs = 8;
    auto fixtures = make_run_fixtures(script);

    // cleaner drops 4 of 10 documents, then judge sees only 6 pairs
    json cleaner{{"steps", json::array({json{{"times", 4}, {"content", ""}},
                                        json{{"times", 6}, {"content_mode", "echo_user"}}})}};
    fixtures.cleaner = cleaner;
    json evals = json::array();
    for (int p = 1; p <= 6; ++p) {
        evals.push_back(json{{"pair_id", p}, {"score", 6.0}, {"comment", "c"}});
    }
    fixtures.judge = json{{"steps", json::array({json{{"content",
                                                       json{{"pair_evaluations", evals},
                                                            {"prompt_analysis", "a"}}
                                                           .dump()}}})}};

    RunConfig rc = test_run_config("r1", dir_ / "runs", 1, 10, 10, 8);
    EvolutionRun run(rc, store, backends_from(fixtures));
    RunManifest manifest = run.run();

    ASSERT_EQ(manifest.reports.size(), 1u);
    EXPECT_EQ(manifest.reports[0].dropped_docs, 4u);
    ASSERT_EQ(run.strategies().records.size(), 1u);
    EXPECT_EQ(run.strategies().records[0].pair_evaluations.size(), 6u);
}

TEST_F(EvolutionTest, RunConfigValidation) {
    RunConfig rc = test_run_config("r1", dir_, 0);
    EXPECT_THROW(rc.validate(), ConfigError);

    rc = test_run_config("r1", dir_, 3);
    rc.judge_pairs = 50;
    rc.clean_docs = 10;
    EXPECT_THROW(rc.validate(), ConfigError);

    rc = test_run_config("", dir_, 3);
    EXPECT_THROW(rc.validate(), ConfigError);
}
