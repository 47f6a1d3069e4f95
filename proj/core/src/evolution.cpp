#include "evoclean/evolution.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "evoclean/errors.hpp"
#include "evoclean/hash.hpp"
#include "evoclean/jsonio.hpp"
#include "evoclean/rng.hpp"

namespace evoclean {

namespace {

std::string iter_stem(std::uint64_t i, const char* role) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "iter_%03llu_%s", static_cast<unsigned long long>(i), role);
    return buf;
}

json environment_fingerprint(const std::string& tokenizer_name) {
    return json{{"platform",
#if defined(__linux__)
                 "linux"
#elif defined(__APPLE__)
                 "darwin"
#else
                 "other"
#endif
                 },
                {"compiler", __VERSION__},
                {"library", "evoclean 0.1.0"},
                {"tokenizer", tokenizer_name}};
}

}  // namespace

void RunConfig::validate() const {
    if (run_id.empty()) throw ConfigError("run id must be set");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (observe_docs < 1 || clean_docs < 1 || judge_pairs < 1) {
        throw ConfigError("all sampling budgets must be >= 1");
    }
    if (judge_pairs > clean_docs) {
        throw ConfigError("judge_pairs (" + std::to_string(judge_pairs) +
                          ") must not exceed clean_docs (" + std::to_string(clean_docs) + ")");
    }
    if (max_tool_rounds < 1) throw ConfigError("max_tool_rounds must be >= 1");
    if (descriptor.domain_text.empty() || descriptor.content_text.empty()) {
        throw ConfigError("category descriptor texts must be non-empty");
    }
}

json IterationReport::to_json() const {
    return json{{"iteration", iteration},
                {"failed", failed},
                {"error", error},
                {"score", score ? json(round4(*score)) : json(nullptr)},
                {"experience_before", experience_before},
                {"experience_after", experience_after},
                {"strategy_pool_size", strategy_pool_size},
                {"dropped_docs", dropped_docs},
                {"parent_iteration", parent_iteration ? json(*parent_iteration) : json(nullptr)},
                {"designer_transcript", designer_transcript},
                {"judge_transcript", judge_transcript}};
}

IterationReport IterationReport::from_json(const json& j) {
    IterationReport r;
    r.iteration = j.at("iteration").get<std::uint64_t>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.value("error", "");
    if (!j.at("score").is_null()) r.score = j.at("score").get<double>();
    r.experience_before = j.at("experience_before").get<std::size_t>();
    r.experience_after = j.at("experience_after").get<std::size_t>();
    r.strategy_pool_size = j.at("strategy_pool_size").get<std::size_t>();
    r.dropped_docs = j.at("dropped_docs").get<std::size_t>();
    if (!j.at("parent_iteration").is_null()) {
        r.parent_iteration = j.at("parent_iteration").get<std::uint64_t>();
    }
    r.designer_transcript = j.value("designer_transcript", "");
    r.judge_transcript = j.value("judge_transcript", "");
    return r;
}

json RunManifest::to_json() const {
    json iters = json::array();
    for (const auto& r : reports) iters.push_back(r.to_json());
    return json{{"schema_version", 1},
                {"run_id", run_id},
                {"category", category_slug},
                {"config", config_snapshot},
                {"environment", environment},
                {"initialization", initialization ? *initialization : json(nullptr)},
                {"sampler", json{{"policy", "reshuffle-seed-plus-epoch"},
                                 {"epoch", sampler_epoch},
                                 {"cursor", sampler_cursor}}},
                {"iterations", iters},
                {"selected_best", selected_best ? json(*selected_best) : json(nullptr)}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.category_slug = j.at("category").get<std::string>();
    m.config_snapshot = j.at("config");
    m.environment = j.at("environment");
    if (!j.at("initialization").is_null()) m.initialization = j.at("initialization");
    m.sampler_epoch = j.at("sampler").at("epoch").get<std::uint64_t>();
    m.sampler_cursor = j.at("sampler").at("cursor").get<std::size_t>();
    for (const auto& rj : j.at("iterations")) m.reports.push_back(IterationReport::from_json(rj));
    if (!j.at("selected_best").is_null()) {
        m.selected_best = j.at("selected_best").get<std::uint64_t>();
    }
    return m;
}

EvolutionRun::EvolutionRun(RunConfig config, const CorpusStore& store)
    : EvolutionRun(std::move(config), store, {}) {}

EvolutionRun::EvolutionRun(RunConfig config, const CorpusStore& store,
                           std::map<AgentRole, std::shared_ptr<ChatBackend>> backends)
    : config_(std::move(config)), store_(store) {
    config_.validate();
    auto client_for = [&](const AgentProfile& profile, AgentRole role) {
        auto it = backends.find(role);
        if (it != backends.end()) {
            return std::make_unique<ChatClient>(profile.endpoint, it->second);
        }
        return std::make_unique<ChatClient>(profile.endpoint);
    };
    observer_client_ = client_for(config_.observer, AgentRole::observer);
    designer_client_ = client_for(config_.designer, AgentRole::designer);
    cleaner_client_ = client_for(config_.cleaner, AgentRole::cleaner);
    judge_client_ = client_for(config_.judge, AgentRole::judge);
    load_or_init_state();
}

std::filesystem::path EvolutionRun::category_dir() const {
    return config_.runs_root / config_.run_id / config_.category.slug();
}

std::filesystem::path EvolutionRun::transcript_path(const std::string& stem) const {
    return category_dir() / "transcripts" / (stem + ".jsonl");
}

void EvolutionRun::load_or_init_state() {
    auto dir = category_dir();
    std::filesystem::create_directories(dir / "transcripts");
    auto manifest_path = dir / "manifest.json";

    if (std::filesystem::exists(manifest_path)) {
        manifest_ = RunManifest::from_json(json::parse(read_file(manifest_path)));
        if (manifest_.category_slug != config_.category.slug()) {
            throw ConfigError("run directory belongs to category " + manifest_.category_slug);
        }
        experience_pool_ = load_experience_pool(dir / "experience_pool.json");
        strategy_pool_ = load_strategy_pool(dir / "strategy_pool.json");
        sampler_ = std::make_unique<CategorySampler>(config_.category, config_.seed,
                                                     store_.docs(config_.category).size());
        sampler_->restore(manifest_.sampler_epoch, manifest_.sampler_cursor);
        std::cerr << "[evolve] resuming " << config_.category.slug() << " at iteration "
                  << (manifest_.reports.empty() ? 1 : manifest_.reports.back().iteration + 1)
                  << "\n";
    } else {
        experience_pool_.category = config_.category;
        strategy_pool_.category = config_.category;
        manifest_.run_id = config_.run_id;
        manifest_.category_slug = config_.category.slug();
        manifest_.config_snapshot =
            json{{"iterations", config_.iterations},
                 {"observe_docs", config_.observe_docs},
                 {"clean_docs", config_.clean_docs},
                 {"judge_pairs", config_.judge_pairs},
                 {"seed", config_.seed},
                 {"max_tool_rounds", config_.max_tool_rounds},
                 {"descriptor", json{{"domain", config_.descriptor.domain_text},
                                     {"content", config_.descriptor.content_text}}},
                 {"models", json{{"observer", config_.observer.endpoint.model_name},
                                 {"designer", config_.designer.endpoint.model_name},
                                 {"cleaner", config_.cleaner.endpoint.model_name},
                                 {"judge", config_.judge.endpoint.model_name}}}};
        manifest_.environment = environment_fingerprint(store_.tokenizer_name);
        sampler_ = std::make_unique<CategorySampler>(config_.category, config_.seed,
                                                     store_.docs(config_.category).size());
    }
    sampler_->on_epoch = [this](std::uint64_t epoch) {
        std::cerr << "[evolve] " << config_.category.slug() << ": sampler epoch " << epoch
                  << " (reshuffled with seed " << (config_.seed + epoch) << ")\n";
    };
}

void EvolutionRun::persist() {
    auto dir = category_dir();
    manifest_.sampler_epoch = sampler_->epoch();
    manifest_.sampler_cursor = sampler_->cursor();
    save_experience_pool(experience_pool_, dir / "experience_pool.json");
    save_strategy_pool(strategy_pool_, dir / "strategy_pool.json");
    atomic_write_file(dir / "manifest.json", canonical_dump(manifest_.to_json()));
}

void EvolutionRun::initialize() {
    if (!experience_pool_.entries.empty()) {
        std::cerr << "[evolve] experience pool already seeded (" << experience_pool_.entries.size()
                  << " entries); skipping observation\n";
        return;
    }
    auto samples = sampler_->draw(store_, config_.observe_docs);
    Transcript transcript = observe(*observer_client_, config_.observer, config_.descriptor,
                                    samples, experience_pool_, 0, config_.max_tool_rounds);
    transcript.save_jsonl(transcript_path("init_observer"));
    manifest_.initialization = json{{"observer_transcript", hex64(transcript.digest())},
                                    {"experiences", experience_pool_.entries.size()}};
    persist();
}

IterationReport EvolutionRun::run_iteration(std::uint64_t i) {
    IterationReport report;
    report.iteration = i;
    report.experience_before = experience_pool_.entries.size();
    auto t0 = std::chrono::steady_clock::now();

    try {
        const StrategyRecord* best =
            strategy_pool_.records.empty() ? nullptr : &best_strategy(strategy_pool_);
        if (best) report.parent_iteration = best->iteration;

        auto [designed, design_transcript] =
            design(*designer_client_, config_.designer, config_.descriptor, experience_pool_, best,
                   config_.max_tool_rounds);
        design_transcript.save_jsonl(transcript_path(iter_stem(i, "designer")));
        report.designer_transcript = hex64(design_transcript.digest());

        auto batch = sampler_->draw(store_, config_.clean_docs);
        std::vector<DocumentPair> pairs;
        pairs.reserve(batch.size());
        for (const auto& doc : batch) {
            std::string cleaned = clean(*cleaner_client_, designed.prompt_content, doc);
            if (cleaned.empty()) {
                ++report.dropped_docs;
                continue;
            }
            pairs.push_back(DocumentPair{doc.text, std::move(cleaned)});
        }
        if (pairs.empty()) throw Error("cleaner dropped every document in the batch");

        // Judged pairs come only from this iteration's surviving batch.
        std::size_t k = std::min<std::size_t>(config_.judge_pairs, pairs.size());
        Rng pair_rng(config_.seed ^ i);
        std::vector<DocumentPair> judged;
        judged.reserve(k);
        for (auto idx : pair_rng.sample_indices(pairs.size(), k)) {
            judged.push_back(pairs[idx]);
        }

        auto [judged_out, judge_transcript] =
            judge(*judge_client_, config_.judge, config_.descriptor, designed.prompt_content,
                  judged, i, experience_pool_, config_.max_tool_rounds);
        judge_transcript.save_jsonl(transcript_path(iter_stem(i, "judge")));
        report.judge_transcript = hex64(judge_transcript.digest());

        double score = aggregate_score(judged_out);
        StrategyRecord record;
        record.iteration = i;
        record.prompt_content = designed.prompt_content;
        record.design_rationale = designed.design_rationale;
        record.key_improvements = designed.key_improvements;
        record.expected_benefits = designed.expected_benefits;
        record.score = score;
        record.pair_evaluations = judged_out.pair_evaluations;
        record.prompt_analysis = judged_out.prompt_analysis;
        record.parent_iteration = report.parent_iteration;

        std::uint64_t last =
            strategy_pool_.records.empty() ? 0 : strategy_pool_.records.back().iteration;
        record_strategy(strategy_pool_, std::move(record), /*allow_gap=*/last + 1 < i);
        report.score = score;
    } catch (const FixtureError&) {
        throw;  // scripted-test misconfiguration must not be swallowed
    } catch (const std::exception& e) {
        report.failed = true;
        report.error = e.what();
        std::cerr << "[evolve] iteration " << i << " failed: " << e.what() << "\n";
    }

    report.experience_after = experience_pool_.entries.size();
    report.strategy_pool_size = strategy_pool_.records.size();
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

RunManifest EvolutionRun::run() {
    initialize();

    std::uint64_t next =
        manifest_.reports.empty() ? 1 : manifest_.reports.back().iteration + 1;
    for (std::uint64_t i = next; i <= config_.iterations; ++i) {
        IterationReport report = run_iteration(i);
        manifest_.reports.push_back(report);
        persist();
        {
            std::ofstream timings(category_dir() / "timings.jsonl", std::ios::app);
            timings << json{{"iteration", i}, {"wall_time_ms", round4(report.wall_time_ms)}}.dump()
                    << "\n";
        }

        std::size_t failed = 0;
        for (const auto& r : manifest_.reports) failed += r.failed ? 1 : 0;
        if (failed * 2 > config_.iterations) {
            throw Error("aborting run: " + std::to_string(failed) + " of " +
                        std::to_string(config_.iterations) +
                        " iterations failed (last error: " + report.error + ")");
        }
        if (config_.stop_after != 0 && i >= config_.stop_after) {
            std::cerr << "[evolve] stopping after iteration " << i << " as configured\n";
            return manifest_;
        }
    }

    manifest_.selected_best = best_strategy(strategy_pool_).iteration;
    persist();
    return manifest_;
}

}  // namespace evoclean
