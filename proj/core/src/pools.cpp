#include "evoclean/pools.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "evoclean/errors.hpp"
#include "evoclean/jsonio.hpp"

namespace evoclean {

namespace {

// Lowercase, whitespace runs collapsed to one space, ends trimmed.
std::string normalize_for_dedup(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

json category_to_json(const CategoryKey& key) {
    return json{{"content_type", to_string(key.content_type)},
                {"quality", to_string(key.quality)},
                {"domain", to_string(key.domain)}};
}

CategoryKey category_from_json(const json& j) {
    auto ct = content_type_from_string(j.at("content_type").get<std::string>());
    auto q = quality_tier_from_string(j.at("quality").get<std::string>());
    auto d = domain_from_string(j.at("domain").get<std::string>());
    if (!ct || !q || !d) throw ValidationError("bad category key in pool file");
    return CategoryKey{*ct, *q, *d};
}

void validate_record(const StrategyRecord& r) {
    if (r.iteration < 1) throw ValidationError("strategy iteration must be >= 1");
    if (r.prompt_content.find("{text}") == std::string::npos) {
        throw ValidationError("prompt_content missing {text} placeholder (iteration " +
                              std::to_string(r.iteration) + ")");
    }
    if (!r.score) throw ValidationError("strategy record has no score");
    if (*r.score < 1.0 || *r.score > 10.0) {
        throw ValidationError("score outside [1,10]: " + std::to_string(*r.score));
    }
    if (r.pair_evaluations.empty()) throw ValidationError("strategy record has no pair evaluations");
    double sum = 0.0;
    for (const auto& pe : r.pair_evaluations) {
        if (pe.score < 1.0 || pe.score > 10.0) {
            throw ValidationError("pair score outside [1,10]: " + std::to_string(pe.score));
        }
        sum += pe.score;
    }
    double mean = sum / static_cast<double>(r.pair_evaluations.size());
    if (std::abs(mean - *r.score) > 1e-9) {
        throw ValidationError("score does not equal mean of pair evaluations");
    }
    if (r.parent_iteration && *r.parent_iteration >= r.iteration) {
        throw ValidationError("parent_iteration must precede iteration");
    }
}

}  // namespace

const char* to_string(ExperienceSource v) {
    return v == ExperienceSource::observer ? "observer" : "judge";
}

std::optional<ExperienceSource> experience_source_from_string(const std::string& s) {
    if (s == "observer") return ExperienceSource::observer;
    if (s == "judge") return ExperienceSource::judge;
    return std::nullopt;
}

AddResult add_experience(ExperiencePool& pool, const std::string& text, ExperienceSource source,
                         std::uint64_t iteration) {
    std::string norm = normalize_for_dedup(text);
    if (norm.empty()) throw ValidationError("experience text is empty");
    for (const auto& e : pool.entries) {
        if (normalize_for_dedup(e.text) == norm) return AddResult::duplicate;
    }
    Experience e;
    e.id = pool.entries.empty() ? 1 : pool.entries.back().id + 1;
    e.text = text;
    e.source = source;
    e.iteration_added = iteration;
    pool.entries.push_back(std::move(e));
    return AddResult::added;
}

std::vector<std::string> read_experiences(const ExperiencePool& pool) {
    std::vector<std::string> out;
    out.reserve(pool.entries.size());
    for (const auto& e : pool.entries) out.push_back(e.text);
    return out;
}

void record_strategy(StrategyPool& pool, StrategyRecord record, bool allow_gap) {
    validate_record(record);
    std::uint64_t last = pool.records.empty() ? 0 : pool.records.back().iteration;
    if (record.iteration <= last) {
        throw ValidationError("strategy iteration " + std::to_string(record.iteration) +
                              " repeats or precedes recorded iteration " + std::to_string(last));
    }
    if (record.iteration != last + 1 && !allow_gap) {
        throw ValidationError("strategy iteration gap: expected " + std::to_string(last + 1) +
                              ", got " + std::to_string(record.iteration));
    }
    pool.records.push_back(std::move(record));
}

const StrategyRecord& best_strategy(const StrategyPool& pool) {
    if (pool.records.empty()) throw ValidationError("strategy pool is empty");
    const StrategyRecord* best = nullptr;
    for (const auto& r : pool.records) {
        if (!r.score) throw ValidationError("unset score at iteration " + std::to_string(r.iteration));
        if (!best || *r.score >= *best->score) best = &r;  // >= : ties go to the latest
    }
    return *best;
}

void save_experience_pool(const ExperiencePool& pool, const std::filesystem::path& path) {
    json entries = json::array();
    for (const auto& e : pool.entries) {
        entries.push_back(json{{"id", e.id},
                               {"text", e.text},
                               {"source", to_string(e.source)},
                               {"iteration_added", e.iteration_added}});
    }
    json j{{"category", category_to_json(pool.category)}, {"entries", entries}};
    atomic_write_file(path, canonical_dump(j));
}

ExperiencePool load_experience_pool(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    ExperiencePool pool;
    pool.category = category_from_json(j.at("category"));
    for (const auto& ej : j.at("entries")) {
        Experience e;
        e.id = ej.at("id").get<std::uint64_t>();
        e.text = ej.at("text").get<std::string>();
        auto src = experience_source_from_string(ej.at("source").get<std::string>());
        if (!src) throw ValidationError("bad experience source in " + path.string());
        e.source = *src;
        e.iteration_added = ej.at("iteration_added").get<std::uint64_t>();
        if (!pool.entries.empty() && e.id <= pool.entries.back().id) {
            throw ValidationError("experience ids not strictly increasing in " + path.string());
        }
        pool.entries.push_back(std::move(e));
    }
    return pool;
}

void save_strategy_pool(const StrategyPool& pool, const std::filesystem::path& path) {
    json records = json::array();
    for (const auto& r : pool.records) {
        json evals = json::array();
        for (const auto& pe : r.pair_evaluations) {
            evals.push_back(json{{"pair_id", pe.pair_id},
                                 {"score", round4(pe.score)},
                                 {"comment", pe.comment}});
        }
        json rj{{"iteration", r.iteration},
                {"prompt_content", r.prompt_content},
                {"design_rationale", r.design_rationale},
                {"key_improvements", r.key_improvements},
                {"expected_benefits", r.expected_benefits},
                {"score", r.score ? json(round4(*r.score)) : json(nullptr)},
                {"pair_evaluations", evals},
                {"prompt_analysis", r.prompt_analysis},
                {"parent_iteration",
                 r.parent_iteration ? json(*r.parent_iteration) : json(nullptr)}};
        records.push_back(std::move(rj));
    }
    json j{{"category", category_to_json(pool.category)}, {"records", records}};
    atomic_write_file(path, canonical_dump(j));
}

StrategyPool load_strategy_pool(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    StrategyPool pool;
    pool.category = category_from_json(j.at("category"));
    for (const auto& rj : j.at("records")) {
        StrategyRecord r;
        r.iteration = rj.at("iteration").get<std::uint64_t>();
        r.prompt_content = rj.at("prompt_content").get<std::string>();
        r.design_rationale = rj.at("design_rationale").get<std::string>();
        r.key_improvements = rj.at("key_improvements").get<std::vector<std::string>>();
        r.expected_benefits = rj.at("expected_benefits").get<std::string>();
        if (!rj.at("score").is_null()) r.score = rj.at("score").get<double>();
        for (const auto& pj : rj.at("pair_evaluations")) {
            r.pair_evaluations.push_back(PairEvaluation{pj.at("pair_id").get<std::uint64_t>(),
                                                        pj.at("score").get<double>(),
                                                        pj.at("comment").get<std::string>()});
        }
        r.prompt_analysis = rj.at("prompt_analysis").get<std::string>();
        if (!rj.at("parent_iteration").is_null()) {
            r.parent_iteration = rj.at("parent_iteration").get<std::uint64_t>();
        }
        pool.records.push_back(std::move(r));
    }
    return pool;
}

}  // namespace evoclean
