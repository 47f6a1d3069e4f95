#include "evoclean/deploy.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "evoclean/agents.hpp"
#include "evoclean/errors.hpp"
#include "evoclean/hash.hpp"
#include "evoclean/jsonio.hpp"

namespace evoclean {

namespace {

enum class DocOutcome { ok, dropped, error };

struct DocResult {
    DocOutcome outcome = DocOutcome::ok;
    std::string cleaned;
    std::uint64_t token_count = 0;
    std::string error;
};

json meta_json(const Document& doc) {
    return json{{"fdc", doc.fdc_code ? json(*doc.fdc_code) : json(nullptr)},
                {"doc_type", doc.doc_type},
                {"quality", doc.quality}};
}

struct CheckpointFile {
    std::string corpus_digest;
    std::string strategy_digest;
    std::uint64_t docs_processed = 0;
    std::uint64_t byte_offset = 0;
    bool complete = false;
    DeployStats stats;

    json to_json() const {
        return json{{"corpus_digest", corpus_digest},
                    {"strategy_digest", strategy_digest},
                    {"docs_processed", docs_processed},
                    {"byte_offset", byte_offset},
                    {"completed_intervals", json::array({json::array({0, docs_processed})})},
                    {"complete", complete},
                    {"stats", stats.to_json()}};
    }

    static CheckpointFile from_json(const json& j) {
        CheckpointFile c;
        c.corpus_digest = j.at("corpus_digest").get<std::string>();
        c.strategy_digest = j.at("strategy_digest").get<std::string>();
        c.docs_processed = j.at("docs_processed").get<std::uint64_t>();
        c.byte_offset = j.at("byte_offset").get<std::uint64_t>();
        c.complete = j.at("complete").get<bool>();
        c.stats = DeployStats::from_json(j.at("stats"));
        return c;
    }
};

DeployStats run_deploy(const StrategyRecord& strategy, const CorpusStore& store,
                       const CategoryKey& category, ChatClient& cleaner_client,
                       const Tokenizer& tok, const std::filesystem::path& out_path,
                       const DeployOptions& options, bool require_checkpoint) {
    if (!strategy.score) throw ValidationError("strategy has no score; judge it before deploying");
    if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    const auto& docs = store.docs(category);
    const std::uint64_t n = docs.size();
    const std::string corp_digest = hex64(corpus_digest(store, category));
    const std::string strat_digest = hex64(strategy_digest(strategy));

    auto ckpt_path = out_path;
    ckpt_path += ".checkpoint.json";
    auto stats_path = out_path;
    stats_path += ".stats.json";
    auto failures_path = out_path;
    failures_path += ".failures.jsonl";

    DeployStats stats;
    std::uint64_t start_index = 0;

    if (std::filesystem::exists(ckpt_path)) {
        auto ckpt = CheckpointFile::from_json(json::parse(read_file(ckpt_path)));
        if (ckpt.corpus_digest != corp_digest || ckpt.strategy_digest != strat_digest) {
            throw ValidationError(
                "checkpoint at " + ckpt_path.string() +
                " was written for a different corpus or strategy; refusing to resume");
        }
        if (ckpt.complete) {
            return ckpt.stats;  // finished earlier; echo the recorded stats
        }
        stats = ckpt.stats;
        start_index = ckpt.docs_processed;
        std::filesystem::resize_file(out_path, ckpt.byte_offset);
    } else {
        if (require_checkpoint) {
            throw ValidationError("no checkpoint at " + ckpt_path.string() + "; nothing to resume");
        }
        std::ofstream(out_path, std::ios::binary | std::ios::trunc);
        std::ofstream(failures_path, std::ios::binary | std::ios::trunc);
    }

    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open output: " + out_path.string());
    std::ofstream failures(failures_path, std::ios::binary | std::ios::app);

    auto t0 = std::chrono::steady_clock::now();

    std::atomic<std::uint64_t> next_index{start_index};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::uint64_t, DocResult> results;

    auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            std::uint64_t idx = next_index.fetch_add(1);
            if (idx >= n) break;
            DocResult res;
            try {
                std::string cleaned = clean(cleaner_client, strategy.prompt_content, docs[idx]);
                if (cleaned.empty()) {
                    res.outcome = DocOutcome::dropped;
                } else if (contains_artificial_marker(cleaned, options.extra_artificial_markers)) {
                    res.outcome = DocOutcome::error;
                    res.error = "artificial marker in cleaned output";
                } else {
                    res.outcome = DocOutcome::ok;
                    res.token_count = tok.count(cleaned);
                    res.cleaned = std::move(cleaned);
                }
            } catch (const std::exception& e) {
                res.outcome = DocOutcome::error;
                res.error = e.what();
            }
            {
                std::lock_guard lock(mu);
                results.emplace(idx, std::move(res));
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> threads;
    const int workers = std::min<std::uint64_t>(options.parallelism, std::max<std::uint64_t>(1, n));
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);

    auto join_all = [&] {
        stop.store(true);
        for (auto& t : threads)
            if (t.joinable()) t.join();
    };

    auto write_checkpoint = [&](std::uint64_t processed, bool complete) {
        out.flush();
        CheckpointFile ckpt;
        ckpt.corpus_digest = corp_digest;
        ckpt.strategy_digest = strat_digest;
        ckpt.docs_processed = processed;
        ckpt.byte_offset = std::filesystem::file_size(out_path);
        ckpt.complete = complete;
        ckpt.stats = stats;
        atomic_write_file(ckpt_path, canonical_dump(ckpt.to_json()));
    };

    const std::uint64_t abort_threshold = n / 100;  // abort when errors exceed 1% of the corpus

    try {
        for (std::uint64_t idx = start_index; idx < n; ++idx) {
            DocResult res;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return results.count(idx) > 0; });
                res = std::move(results.at(idx));
                results.erase(idx);
            }
            const Document& doc = docs[idx];
            ++stats.docs_in;
            stats.tokens_in += doc.token_count;
            switch (res.outcome) {
                case DocOutcome::ok: {
                    json line{{"id", doc.id},
                              {"text", res.cleaned},
                              {"meta", meta_json(doc)},
                              {"token_count", res.token_count}};
                    out << line.dump() << "\n";
                    ++stats.docs_out;
                    stats.tokens_out += res.token_count;
                    break;
                }
                case DocOutcome::dropped:
                    ++stats.dropped;
                    break;
                case DocOutcome::error:
                    ++stats.errors;
                    failures << json{{"id", doc.id}, {"error", res.error}}.dump() << "\n";
                    failures.flush();
                    if (stats.errors > abort_threshold) {
                        join_all();
                        write_checkpoint(idx + 1, false);
                        throw Error("deploy aborted: " + std::to_string(stats.errors) +
                                    " failures exceed 1% of " + std::to_string(n) + " documents");
                    }
                    break;
            }

            std::uint64_t processed = idx + 1;
            if (options.checkpoint_interval > 0 && processed % options.checkpoint_interval == 0 &&
                processed < n) {
                write_checkpoint(processed, false);
            }
            if (options.stop_after_docs > 0 &&
                processed - start_index >= options.stop_after_docs && processed < n) {
                // Simulated crash: leave the last checkpoint as-is.
                join_all();
                out.flush();
                stats.wall_time_ms +=
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
                return stats;
            }
        }
    } catch (...) {
        join_all();
        throw;
    }
    join_all();

    stats.wall_time_ms +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    stats.reduction_ratio =
        stats.tokens_in == 0
            ? 0.0
            : 1.0 - static_cast<double>(stats.tokens_out) / static_cast<double>(stats.tokens_in);
    if (stats.reduction_ratio < 0) {
        std::fprintf(stderr, "[deploy] cleaned text grew: reduction ratio %.4f\n",
                     stats.reduction_ratio);
    }
    stats.complete = true;
    write_checkpoint(n, true);
    atomic_write_file(stats_path, canonical_dump(stats.to_json()));
    return stats;
}

}  // namespace

json DeployStats::to_json() const {
    return json{{"docs_in", docs_in},
                {"docs_out", docs_out},
                {"dropped", dropped},
                {"errors", errors},
                {"tokens_in", tokens_in},
                {"tokens_out", tokens_out},
                {"reduction_ratio", round4(reduction_ratio)},
                {"wall_time_ms", round4(wall_time_ms)},
                {"complete", complete}};
}

DeployStats DeployStats::from_json(const json& j) {
    DeployStats s;
    s.docs_in = j.at("docs_in").get<std::uint64_t>();
    s.docs_out = j.at("docs_out").get<std::uint64_t>();
    s.dropped = j.at("dropped").get<std::uint64_t>();
    s.errors = j.at("errors").get<std::uint64_t>();
    s.tokens_in = j.at("tokens_in").get<std::uint64_t>();
    s.tokens_out = j.at("tokens_out").get<std::uint64_t>();
    s.reduction_ratio = j.at("reduction_ratio").get<double>();
    s.wall_time_ms = j.value("wall_time_ms", 0.0);
    s.complete = j.at("complete").get<bool>();
    return s;
}

std::uint64_t corpus_digest(const CorpusStore& store, const CategoryKey& category) {
    std::uint64_t h = kFnvOffset;
    for (const auto& doc : store.docs(category)) {
        h = fnv1a64(doc.id, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
        h = fnv1a64(doc.text, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
    }
    return h;
}

std::uint64_t strategy_digest(const StrategyRecord& strategy) {
    std::uint64_t h = fnv1a64(strategy.prompt_content);
    return fnv1a64_u64(strategy.iteration, h);
}

DeployStats deploy(const StrategyRecord& strategy, const CorpusStore& store,
                   const CategoryKey& category, ChatClient& cleaner_client, const Tokenizer& tok,
                   const std::filesystem::path& out_path, const DeployOptions& options) {
    return run_deploy(strategy, store, category, cleaner_client, tok, out_path, options, false);
}

DeployStats resume(const StrategyRecord& strategy, const CorpusStore& store,
                   const CategoryKey& category, ChatClient& cleaner_client, const Tokenizer& tok,
                   const std::filesystem::path& out_path, const DeployOptions& options) {
    return run_deploy(strategy, store, category, cleaner_client, tok, out_path, options, true);
}

}  // namespace evoclean
