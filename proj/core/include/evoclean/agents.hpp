#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evoclean/gateway.hpp"
#include "evoclean/pools.hpp"
#include "evoclean/prompts.hpp"
#include "evoclean/types.hpp"

namespace evoclean {

enum class AgentRole { observer, designer, cleaner, judge };

const char* to_string(AgentRole r);

// Human-readable names substituted at the {config.DOMAIN} / {config.CONTENT}
// template sites.
struct CategoryDescriptor {
    std::string domain_text;
    std::string content_text;
};

CategoryDescriptor default_descriptor(const CategoryKey& key);

// Role plus endpoint plus the resolved templates. Templates always come from
// verified assets, so the byte-for-byte invariant holds by construction.
struct AgentProfile {
    AgentRole role = AgentRole::observer;
    EndpointConfig endpoint;
    std::string system_template;  // empty for the cleaner
    std::string user_template;    // empty for the cleaner

    static AgentProfile make(AgentRole role, EndpointConfig endpoint,
                             const PromptAssets& assets = embedded_prompts());
};

struct DesignerOutput {
    std::string prompt_content;  // must contain the literal "{text}"
    std::string design_rationale;
    std::vector<std::string> key_improvements;
    std::string expected_benefits;
};

struct JudgeOutput {
    std::vector<PairEvaluation> pair_evaluations;  // pair_ids exactly 1..K
    std::string prompt_analysis;
};

struct DocumentPair {
    std::string original;
    std::string cleaned;
};

// Rendered-prompt builders, exposed for the golden-file tests.
std::string render_observer_user(const PromptAssets& assets, const CategoryDescriptor& descriptor,
                                 const std::vector<Document>& samples);
std::string render_designer_user(const PromptAssets& assets, const CategoryDescriptor& descriptor,
                                 const StrategyRecord* best);
std::string render_judge_user(const PromptAssets& assets, const std::string& prompt_content,
                              const std::vector<DocumentPair>& pairs, std::uint64_t iteration);

std::vector<ToolSpec> observer_tools();
std::vector<ToolSpec> designer_tools();
std::vector<ToolSpec> judge_tools();

// Samples rendered as numbered example blocks; read/write experience tools
// wired to the pool. Growth happens through tool calls only.
Transcript observe(ChatClient& client, const AgentProfile& profile,
                   const CategoryDescriptor& descriptor, const std::vector<Document>& samples,
                   ExperiencePool& pool, std::uint64_t iteration, int max_rounds = 16);

// One automatic re-ask on malformed output or a missing {text} placeholder,
// then a hard ValidationError. When the update_cleaning_prompt tool value and
// the JSON disagree, the JSON wins and a warning is emitted.
std::pair<DesignerOutput, Transcript> design(ChatClient& client, const AgentProfile& profile,
                                             const CategoryDescriptor& descriptor,
                                             const ExperiencePool& pool,
                                             const StrategyRecord* best, int max_rounds = 16);

// Substitutes every {text} occurrence, sends one user message, returns the
// trimmed assistant text. Empty means the document is dropped.
std::string clean(ChatClient& client, const std::string& strategy_prompt, const Document& doc);

std::pair<JudgeOutput, Transcript> judge(ChatClient& client, const AgentProfile& profile,
                                         const CategoryDescriptor& descriptor,
                                         const std::string& strategy_prompt,
                                         const std::vector<DocumentPair>& pairs,
                                         std::uint64_t iteration, ExperiencePool& pool,
                                         int max_rounds = 16);

double aggregate_score(const JudgeOutput& out);

// The three forbidden markers from the designer system prompt plus any
// configured extensions.
bool contains_artificial_marker(std::string_view text,
                                const std::vector<std::string>& extra_markers = {});

}  // namespace evoclean
