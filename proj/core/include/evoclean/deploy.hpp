#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evoclean/corpus.hpp"
#include "evoclean/gateway.hpp"
#include "evoclean/pools.hpp"

namespace evoclean {

struct DeployStats {
    std::uint64_t docs_in = 0;
    std::uint64_t docs_out = 0;
    std::uint64_t dropped = 0;  // cleaner returned empty output
    std::uint64_t errors = 0;   // failures after retries, recorded and excluded
    std::uint64_t tokens_in = 0;
    std::uint64_t tokens_out = 0;
    double reduction_ratio = 0.0;  // 1 - tokens_out/tokens_in; negative when text grew
    double wall_time_ms = 0.0;
    bool complete = false;

    json to_json() const;
    static DeployStats from_json(const json& j);
};

struct DeployOptions {
    int parallelism = 4;
    std::uint64_t checkpoint_interval = 1000;  // docs between checkpoint flushes
    std::vector<std::string> extra_artificial_markers;
    // Testing hook: abandon the run after this many documents have been
    // written, without a final checkpoint, simulating a crash.
    std::uint64_t stop_after_docs = 0;
};

// Applies the strategy to every document of the category. Output preserves
// input order regardless of parallelism; empty cleaner output drops the
// document; outputs containing artificial markers are recorded as failures
// and excluded. Writes <out>.checkpoint.json every checkpoint_interval docs,
// <out>.stats.json and a final checkpoint at completion, and appends
// per-document failures to <out>.failures.jsonl.
//
// If a checkpoint for the same (corpus digest, strategy digest) exists the
// run resumes from it; a mismatching checkpoint is refused.
DeployStats deploy(const StrategyRecord& strategy, const CorpusStore& store,
                   const CategoryKey& category, ChatClient& cleaner_client, const Tokenizer& tok,
                   const std::filesystem::path& out_path, const DeployOptions& options);

// Resume-only entry point: requires an existing checkpoint.
DeployStats resume(const StrategyRecord& strategy, const CorpusStore& store,
                   const CategoryKey& category, ChatClient& cleaner_client, const Tokenizer& tok,
                   const std::filesystem::path& out_path, const DeployOptions& options);

std::uint64_t corpus_digest(const CorpusStore& store, const CategoryKey& category);
std::uint64_t strategy_digest(const StrategyRecord& strategy);

}  // namespace evoclean
