#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evoclean/agents.hpp"
#include "evoclean/corpus.hpp"
#include "evoclean/gateway.hpp"
#include "evoclean/pools.hpp"

namespace evoclean {

struct RunConfig {
    std::string run_id;
    CategoryKey category;
    CategoryDescriptor descriptor;
    std::uint64_t iterations = 30;
    std::size_t observe_docs = 100;
    std::size_t clean_docs = 500;
    std::size_t judge_pairs = 50;
    std::uint64_t seed = 0;
    AgentProfile observer;
    AgentProfile designer;
    AgentProfile cleaner;
    AgentProfile judge;
    std::filesystem::path runs_root = "runs";
    int max_tool_rounds = 16;
    // Graceful stop after this iteration; 0 disables. Persistence is atomic
    // per iteration, so stopping here is equivalent to a crash for resume.
    std::uint64_t stop_after = 0;

    void validate() const;
};

struct IterationReport {
    std::uint64_t iteration = 0;
    bool failed = false;
    std::string error;
    std::optional<double> score;
    std::size_t experience_before = 0;
    std::size_t experience_after = 0;
    std::size_t strategy_pool_size = 0;
    std::size_t dropped_docs = 0;
    std::optional<std::uint64_t> parent_iteration;
    std::string designer_transcript;  // fnv1a64 hex digest
    std::string judge_transcript;
    double wall_time_ms = 0.0;  // sidecar only; never serialized into the manifest

    json to_json() const;
    static IterationReport from_json(const json& j);
};

// Everything needed to replay a mock-backend run: config snapshot, seed,
// sampler position, per-iteration reports, selected best. Wall-clock timings
// live in a separate timings.jsonl so the manifest stays deterministic.
struct RunManifest {
    std::string run_id;
    std::string category_slug;
    json config_snapshot;
    json environment;
    std::optional<json> initialization;
    std::uint64_t sampler_epoch = 0;
    std::size_t sampler_cursor = 0;
    std::vector<IterationReport> reports;
    std::optional<std::uint64_t> selected_best;

    json to_json() const;
    static RunManifest from_json(const json& j);
};

// Per-category evolutionary loop: initialization, then design -> clean ->
// judge -> record for each iteration, then best-strategy selection. State is
// persisted after every iteration; constructing over an existing run
// directory resumes where it left off.
class EvolutionRun {
public:
    EvolutionRun(RunConfig config, const CorpusStore& store);
    EvolutionRun(RunConfig config, const CorpusStore& store,
                 std::map<AgentRole, std::shared_ptr<ChatBackend>> backends);

    RunManifest run();

    const ExperiencePool& experiences() const { return experience_pool_; }
    const StrategyPool& strategies() const { return strategy_pool_; }
    const RunManifest& manifest() const { return manifest_; }
    std::filesystem::path category_dir() const;

private:
    void load_or_init_state();
    void initialize();
    IterationReport run_iteration(std::uint64_t i);
    void persist();
    std::filesystem::path transcript_path(const std::string& stem) const;

    RunConfig config_;
    const CorpusStore& store_;
    ExperiencePool experience_pool_;
    StrategyPool strategy_pool_;
    RunManifest manifest_;
    std::unique_ptr<CategorySampler> sampler_;
    std::unique_ptr<ChatClient> observer_client_;
    std::unique_ptr<ChatClient> designer_client_;
    std::unique_ptr<ChatClient> cleaner_client_;
    std::unique_ptr<ChatClient> judge_client_;
};

}  // namespace evoclean
