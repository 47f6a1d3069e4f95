#include "evoclean/agents.hpp"

#include <algorithm>
#include <iostream>

#include "evoclean/errors.hpp"

namespace evoclean {

namespace {

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string numbered_experiences(const ExperiencePool& pool) {
    if (pool.entries.empty()) return "No experiences recorded yet.";
    std::string out;
    std::size_t i = 0;
    for (const auto& e : pool.entries) {
        out += std::to_string(++i);
        out += ". ";
        out += e.text;
        out += '\n';
    }
    return out;
}

std::string issue_text_from_args(const json& args) {
    if (args.contains("issue") && args.at("issue").is_string()) {
        return args.at("issue").get<std::string>();
    }
    // The observer user prompt spells the argument "experience".
    if (args.contains("experience") && args.at("experience").is_string()) {
        return args.at("experience").get<std::string>();
    }
    for (const auto& [k, v] : args.items()) {
        (void)k;
        if (v.is_string()) return v.get<std::string>();
    }
    return "";
}

ToolDispatcher experience_dispatcher(ExperiencePool& pool, ExperienceSource source,
                                     std::uint64_t iteration) {
    return [&pool, source, iteration](const std::string& name, const json& args) -> std::string {
        if (name == "read_experience") {
            return numbered_experiences(pool);
        }
        if (name == "write_experience") {
            std::string text = issue_text_from_args(args);
            if (trim(text).empty()) return "error: issue text is empty";
            auto result = add_experience(pool, text, source, iteration);
            return result == AddResult::added
                       ? "recorded issue #" + std::to_string(pool.entries.back().id)
                       : "duplicate issue, not recorded";
        }
        return "error: tool '" + name + "' not wired";
    };
}

json object_schema(std::initializer_list<std::pair<const char*, const char*>> props,
                   std::initializer_list<const char*> required) {
    json properties = json::object();
    for (const auto& [name, desc] : props) {
        properties[name] = json{{"type", "string"}, {"description", desc}};
    }
    json req = json::array();
    for (const char* r : required) req.push_back(r);
    return json{{"type", "object"}, {"properties", properties}, {"required", req}};
}

const std::vector<std::string>& builtin_markers() {
    static const std::vector<std::string> markers = {"[REMOVED]", "[REDACTED]", "<CLEANED>"};
    return markers;
}

}  // namespace

const char* to_string(AgentRole r) {
    switch (r) {
        case AgentRole::observer: return "observer";
        case AgentRole::designer: return "designer";
        case AgentRole::cleaner: return "cleaner";
        case AgentRole::judge: return "judge";
    }
    return "?";
}

CategoryDescriptor default_descriptor(const CategoryKey& key) {
    auto spaced = [](std::string s) {
        std::replace(s.begin(), s.end(), '_', ' ');
        return s;
    };
    return CategoryDescriptor{spaced(to_string(key.domain)), spaced(to_string(key.content_type))};
}

AgentProfile AgentProfile::make(AgentRole role, EndpointConfig endpoint,
                                const PromptAssets& assets) {
    AgentProfile p;
    p.role = role;
    p.endpoint = std::move(endpoint);
    switch (role) {
        case AgentRole::observer:
            p.system_template = assets.observer_system;
            p.user_template = assets.observer_user;
            break;
        case AgentRole::designer:
            p.system_template = assets.designer_system;
            p.user_template = assets.designer_user;
            break;
        case AgentRole::judge:
            p.system_template = assets.judge_system;
            p.user_template = assets.judge_user;
            break;
        case AgentRole::cleaner:
            break;  // the evolved strategy prompt is the whole prompt
    }
    return p;
}

std::string render_observer_user(const PromptAssets& assets, const CategoryDescriptor& descriptor,
                                 const std::vector<Document>& samples) {
    std::string sample_text;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sample_text += "**Raw Data Example " + std::to_string(i + 1) + ":**\n";
        sample_text += samples[i].text;
        sample_text += "\n\n";
    }
    std::string out = assets.observer_user;
    out = replace_all(std::move(out), "{config.DOMAIN}", descriptor.domain_text);
    out = replace_all(std::move(out), "{config.CONTENT}", descriptor.content_text);
    out = replace_all(std::move(out), "{len(samples)}", std::to_string(samples.size()));
    out = replace_all(std::move(out), "{sample_text}", sample_text);
    return out;
}

std::string render_designer_user(const PromptAssets& assets, const CategoryDescriptor& descriptor,
                                 const StrategyRecord* best) {
    std::string historical;
    if (best) {
        historical = assets.designer_history_best;
        historical = replace_all(std::move(historical), "{best_prompt_content}",
                                 best->prompt_content);
        historical = replace_all(std::move(historical), "{best_prompt_analysis}",
                                 best->prompt_analysis.empty() ? "No analysis available"
                                                               : best->prompt_analysis);
    } else {
        historical = assets.designer_history_first;
    }
    std::string out = assets.designer_user;
    out = replace_all(std::move(out), "{historical_section}", historical);
    out = replace_all(std::move(out), "{config.DOMAIN}", descriptor.domain_text);
    out = replace_all(std::move(out), "{config.CONTENT}", descriptor.content_text);
    return out;
}

std::string render_judge_user(const PromptAssets& assets, const std::string& prompt_content,
                              const std::vector<DocumentPair>& pairs, std::uint64_t iteration) {
    std::string pairs_text;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pairs_text += "\n### Data Pair " + std::to_string(i + 1) + "\n\n**Original Text:**\n```\n";
        pairs_text += pairs[i].original;
        pairs_text += "\n```\n\n**Cleaned Text:**\n```\n";
        pairs_text += pairs[i].cleaned;
        pairs_text += "\n```\n\n---\n";
    }
    std::string out = assets.judge_user;
    out = replace_all(std::move(out), "{iteration}", std::to_string(iteration));
    out = replace_all(std::move(out), "{prompt_content}", prompt_content);
    out = replace_all(std::move(out), "{len(data_pairs)}", std::to_string(pairs.size()));
    out = replace_all(std::move(out), "{pairs_text}", pairs_text);
    return out;
}

std::vector<ToolSpec> observer_tools() {
    return {
        ToolSpec{"read_experience", "Read all identified data quality issues",
                 object_schema({}, {})},
        ToolSpec{"write_experience", "Write a new quality issue to the experience database",
                 object_schema({{"issue", "Clear description of one distinct quality issue"}},
                               {"issue"})},
    };
}

std::vector<ToolSpec> designer_tools() {
    return {
        ToolSpec{"read_experience", "Read all identified data quality issues",
                 object_schema({}, {})},
        ToolSpec{"update_cleaning_prompt",
                 "Update the cleaning prompt file (must include {text} placeholder)",
                 object_schema({{"prompt_content", "Complete cleaning prompt text"}},
                               {"prompt_content"})},
    };
}

std::vector<ToolSpec> judge_tools() { return observer_tools(); }

Transcript observe(ChatClient& client, const AgentProfile& profile,
                   const CategoryDescriptor& descriptor, const std::vector<Document>& samples,
                   ExperiencePool& pool, std::uint64_t iteration, int max_rounds) {
    if (samples.empty()) throw ValidationError("observe() requires at least one sample");
    std::vector<ChatMessage> messages = {
        ChatMessage::system_msg(profile.system_template),
        ChatMessage::user_msg(render_observer_user(embedded_prompts(), descriptor, samples))};
    auto dispatcher = experience_dispatcher(pool, ExperienceSource::observer, iteration);
    auto result = client.run_tool_loop(std::move(messages), observer_tools(), dispatcher,
                                       max_rounds);
    return std::move(result.transcript);
}

std::pair<DesignerOutput, Transcript> design(ChatClient& client, const AgentProfile& profile,
                                             const CategoryDescriptor& descriptor,
                                             const ExperiencePool& pool,
                                             const StrategyRecord* best, int max_rounds) {
    if (pool.entries.empty()) {
        throw ValidationError("designer requires a seeded experience pool; run initialization");
    }
    std::vector<ChatMessage> messages = {
        ChatMessage::system_msg(profile.system_template),
        ChatMessage::user_msg(render_designer_user(embedded_prompts(), descriptor, best))};

    // The pool is read-only here; the captured tool prompt is reconciled
    // against the JSON output, which wins on mismatch.
    std::string tool_prompt;
    auto dispatcher = [&pool, &tool_prompt](const std::string& name,
                                            const json& args) -> std::string {
        if (name == "read_experience") return numbered_experiences(pool);
        if (name == "update_cleaning_prompt") {
            if (args.contains("prompt_content") && args.at("prompt_content").is_string()) {
                tool_prompt = args.at("prompt_content").get<std::string>();
                return "cleaning prompt updated";
            }
            return "error: prompt_content string argument required";
        }
        return "error: tool '" + name + "' not wired";
    };

    Transcript transcript;
    std::string violation;
    for (int ask = 0; ask < 2; ++ask) {
        auto result = client.run_tool_loop(std::move(messages), designer_tools(), dispatcher,
                                           max_rounds);
        transcript.exchanges.insert(transcript.exchanges.end(), result.transcript.exchanges.begin(),
                                    result.transcript.exchanges.end());
        messages = std::move(result.messages);

        violation.clear();
        DesignerOutput out;
        try {
            json j = extract_json(result.final_message.content.value_or(""));
            if (!j.contains("prompt_content") || !j.at("prompt_content").is_string()) {
                violation = "JSON output is missing the prompt_content string field";
            } else {
                out.prompt_content = j.at("prompt_content").get<std::string>();
                out.design_rationale = j.value("design_rationale", "");
                out.expected_benefits = j.value("expected_benefits", "");
                if (j.contains("key_improvements") && j.at("key_improvements").is_array()) {
                    for (const auto& v : j.at("key_improvements")) {
                        if (v.is_string()) out.key_improvements.push_back(v.get<std::string>());
                    }
                }
                if (out.prompt_content.find("{text}") == std::string::npos) {
                    violation = "prompt_content does not contain the literal {text} placeholder";
                }
            }
        } catch (const ValidationError& e) {
            violation = e.what();
        }

        if (violation.empty()) {
            if (!tool_prompt.empty() && tool_prompt != out.prompt_content) {
                std::cerr << "[warn] designer: update_cleaning_prompt value differs from JSON "
                             "prompt_content; using the JSON value\n";
            }
            return {std::move(out), std::move(transcript)};
        }
        if (ask == 0) {
            messages.push_back(ChatMessage::user_msg(
                "Your previous output was invalid: " + violation +
                ". Respond again with the required JSON object as the last thing in your "
                "response; prompt_content must include the literal {text} placeholder."));
        }
    }
    throw ValidationError("designer output invalid after re-ask: " + violation);
}

std::string clean(ChatClient& client, const std::string& strategy_prompt, const Document& doc) {
    if (strategy_prompt.find("{text}") == std::string::npos) {
        throw ValidationError("strategy prompt missing {text} placeholder");
    }
    std::string prompt = replace_all(strategy_prompt, "{text}", doc.text);
    try {
        auto result = client.complete({ChatMessage::user_msg(std::move(prompt))});
        return trim(result.message.content.value_or(""));
    } catch (const TransportError& e) {
        throw TransportError("document " + doc.id + ": " + e.what(), e.last_status());
    } catch (const RequestError& e) {
        throw RequestError("document " + doc.id + ": " + e.what(), e.status());
    } catch (const ProtocolError& e) {
        throw ProtocolError("document " + doc.id + ": " + e.what());
    }
}

std::pair<JudgeOutput, Transcript> judge(ChatClient& client, const AgentProfile& profile,
                                         const CategoryDescriptor& descriptor,
                                         const std::string& strategy_prompt,
                                         const std::vector<DocumentPair>& pairs,
                                         std::uint64_t iteration, ExperiencePool& pool,
                                         int max_rounds) {
    (void)descriptor;
    if (pairs.empty()) throw ValidationError("judge() requires at least one pair");
    std::vector<ChatMessage> messages = {
        ChatMessage::system_msg(profile.system_template),
        ChatMessage::user_msg(
            render_judge_user(embedded_prompts(), strategy_prompt, pairs, iteration))};
    auto dispatcher = experience_dispatcher(pool, ExperienceSource::judge, iteration);

    Transcript transcript;
    std::string violation;
    for (int ask = 0; ask < 2; ++ask) {
        auto result = client.run_tool_loop(std::move(messages), judge_tools(), dispatcher,
                                           max_rounds);
        transcript.exchanges.insert(transcript.exchanges.end(), result.transcript.exchanges.begin(),
                                    result.transcript.exchanges.end());
        messages = std::move(result.messages);

        violation.clear();
        JudgeOutput out;
        try {
            json j = extract_json(result.final_message.content.value_or(""));
            if (!j.contains("pair_evaluations") || !j.at("pair_evaluations").is_array()) {
                violation = "JSON output is missing the pair_evaluations array";
            } else {
                for (const auto& pj : j.at("pair_evaluations")) {
                    PairEvaluation pe;
                    pe.pair_id = pj.at("pair_id").get<std::uint64_t>();
                    pe.score = pj.at("score").get<double>();
                    pe.comment = pj.value("comment", "");
                    out.pair_evaluations.push_back(std::move(pe));
                }
                out.prompt_analysis = j.value("prompt_analysis", "");

                std::vector<std::uint64_t> ids;
                for (const auto& pe : out.pair_evaluations) {
                    ids.push_back(pe.pair_id);
                    if (pe.score < 1.0 || pe.score > 10.0) {
                        violation = "score " + std::to_string(pe.score) + " for pair " +
                                    std::to_string(pe.pair_id) + " is outside [1,10]";
                    }
                }
                if (violation.empty()) {
                    std::sort(ids.begin(), ids.end());
                    bool exact = ids.size() == pairs.size();
                    for (std::size_t i = 0; exact && i < ids.size(); ++i) {
                        exact = ids[i] == i + 1;
                    }
                    if (!exact) {
                        violation = "pair_evaluations must cover pair ids 1.." +
                                    std::to_string(pairs.size()) + " exactly once each";
                    }
                }
            }
        } catch (const ValidationError& e) {
            violation = e.what();
        } catch (const json::exception& e) {
            violation = std::string("pair_evaluations entries malformed: ") + e.what();
        }

        if (violation.empty()) return {std::move(out), std::move(transcript)};
        if (ask == 0) {
            messages.push_back(ChatMessage::user_msg(
                "Your previous output was invalid: " + violation +
                ". Respond again with valid JSON scoring every pair id from 1 to " +
                std::to_string(pairs.size()) + " with scores in [1,10]."));
        }
    }
    throw ValidationError("judge output invalid after re-ask: " + violation);
}

double aggregate_score(const JudgeOutput& out) {
    if (out.pair_evaluations.empty()) throw ValidationError("no pair evaluations to aggregate");
    double sum = 0.0;
    for (const auto& pe : out.pair_evaluations) sum += pe.score;
    return sum / static_cast<double>(out.pair_evaluations.size());
}

bool contains_artificial_marker(std::string_view text,
                                const std::vector<std::string>& extra_markers) {
    for (const auto& m : builtin_markers()) {
        if (text.find(m) != std::string_view::npos) return true;
    }
    for (const auto& m : extra_markers) {
        if (!m.empty() && text.find(m) != std::string_view::npos) return true;
    }
    return false;
}

}  // namespace evoclean
