#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evoclean/types.hpp"

namespace evoclean {

enum class ExperienceSource { observer, judge };

const char* to_string(ExperienceSource v);
std::optional<ExperienceSource> experience_source_from_string(const std::string& s);

// One discovered quality issue. iteration_added == 0 marks the
// initialization phase.
struct Experience {
    std::uint64_t id = 0;
    std::string text;
    ExperienceSource source = ExperienceSource::observer;
    std::uint64_t iteration_added = 0;
};

// Append-only; exact duplicates (case- and whitespace-normalized) are
// rejected so the store stays dumb while the prompts handle semantics.
struct ExperiencePool {
    CategoryKey category;
    std::vector<Experience> entries;
};

enum class AddResult { added, duplicate };

AddResult add_experience(ExperiencePool& pool, const std::string& text, ExperienceSource source,
                         std::uint64_t iteration);

std::vector<std::string> read_experiences(const ExperiencePool& pool);

struct PairEvaluation {
    std::uint64_t pair_id = 0;
    double score = 0.0;
    std::string comment;
};

struct StrategyRecord {
    std::uint64_t iteration = 0;
    std::string prompt_content;  // must contain the literal "{text}"
    std::string design_rationale;
    std::vector<std::string> key_improvements;
    std::string expected_benefits;
    std::optional<double> score;  // mean of pair_evaluations once judged
    std::vector<PairEvaluation> pair_evaluations;
    std::string prompt_analysis;
    std::optional<std::uint64_t> parent_iteration;  // unset only for iteration 1
};

struct StrategyPool {
    CategoryKey category;
    std::vector<StrategyRecord> records;
};

// Appends a judged record. Iterations must advance strictly; a gap is only
// accepted with allow_gap (the evolution loop passes it when intervening
// iterations failed and were recorded in the manifest).
void record_strategy(StrategyPool& pool, StrategyRecord record, bool allow_gap = false);

// Argmax by score; ties go to the latest iteration.
const StrategyRecord& best_strategy(const StrategyPool& pool);

// Canonical JSON persistence (sorted keys, 4-decimal scores, trailing
// newline); writes are temp-then-rename.
void save_experience_pool(const ExperiencePool& pool, const std::filesystem::path& path);
ExperiencePool load_experience_pool(const std::filesystem::path& path);
void save_strategy_pool(const StrategyPool& pool, const std::filesystem::path& path);
StrategyPool load_strategy_pool(const std::filesystem::path& path);

}  // namespace evoclean
