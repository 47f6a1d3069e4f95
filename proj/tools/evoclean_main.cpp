// evoclean CLI: classify / evolve / deploy / metrics / report over a single
// run-config file. Exit codes: 0 ok, 2 config/validation, 3 corpus,
// 4 endpoint/transport, 5 internal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evoclean/agents.hpp"
#include "evoclean/config.hpp"
#include "evoclean/corpus.hpp"
#include "evoclean/deploy.hpp"
#include "evoclean/errors.hpp"
#include "evoclean/evolution.hpp"
#include "evoclean/metrics.hpp"
#include "evoclean/pools.hpp"
#include "evoclean/rng.hpp"

namespace fs = std::filesystem;
using namespace evoclean;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    bool quiet_config = false;
};

FileConfig load_config(const GlobalArgs& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required");
    FileConfig cfg = FileConfig::load(g.config_path, g.overrides);
    if (!g.quiet_config) {
        std::cout << "# effective config\n" << cfg.pretty();
    }
    return cfg;
}

std::string format_tokens(std::uint64_t n) { return std::to_string(n); }

int cmd_classify(const GlobalArgs& g, const std::string& out_dir) {
    FileConfig cfg = load_config(g);
    auto tok = cfg.tokenizer();
    CorpusStore store = load_jsonl(cfg.corpus_input(), *tok, cfg.quality_map(), cfg.doc_type_map());

    fs::create_directories(out_dir);
    std::uint64_t total_docs = 0, total_tokens = 0;
    std::printf("%-14s %-10s %-18s %10s %14s\n", "content_type", "quality", "domain", "docs",
                "tokens");
    for (const auto& [key, docs] : store.categories) {
        fs::path out_path = fs::path(out_dir) / (key.slug() + ".jsonl");
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + out_path.string());
        std::uint64_t tokens = 0;
        for (const auto& d : docs) {
            json line{{"id", d.id},
                      {"text", d.text},
                      {"meta", json{{"fdc", d.fdc_code ? json(*d.fdc_code) : json(nullptr)},
                                    {"doc_type", d.doc_type},
                                    {"quality", d.quality}}}};
            out << line.dump() << "\n";
            tokens += d.token_count;
        }
        std::printf("%-14s %-10s %-18s %10zu %14s\n", to_string(key.content_type),
                    to_string(key.quality), to_string(key.domain), docs.size(),
                    format_tokens(tokens).c_str());
        total_docs += docs.size();
        total_tokens += tokens;
    }
    std::printf("%-44s %10llu %14s\n", "total", static_cast<unsigned long long>(total_docs),
                format_tokens(total_tokens).c_str());
    std::printf("dropped empty-text lines: %zu\ntokenizer: %s\n", store.dropped_empty,
                store.tokenizer_name.c_str());
    return 0;
}

int cmd_evolve(const GlobalArgs& g, const std::string& category_slug) {
    GlobalArgs args = g;
    if (!category_slug.empty()) args.overrides.push_back("category=" + category_slug);
    FileConfig cfg = load_config(args);
    auto tok = cfg.tokenizer();
    CorpusStore store = load_jsonl(cfg.corpus_input(), *tok, cfg.quality_map(), cfg.doc_type_map());

    RunConfig rc = cfg.run_config();
    EvolutionRun run(rc, store);
    RunManifest manifest = run.run();

    std::cout << "manifest: " << (run.category_dir() / "manifest.json").string() << "\n";
    if (manifest.selected_best) {
        const auto& best = best_strategy(run.strategies());
        std::cout << "best iteration: " << *manifest.selected_best << " (score "
                  << *best.score << ")\n";
    } else {
        std::cout << "run stopped before completion; resume with the same command\n";
    }
    return 0;
}

int cmd_deploy(const GlobalArgs& g, const std::string& category_slug, const std::string& run_id,
               const std::string& out_override, bool resume_only) {
    GlobalArgs args = g;
    if (!category_slug.empty()) args.overrides.push_back("category=" + category_slug);
    if (!run_id.empty()) args.overrides.push_back("run.id=" + run_id);
    FileConfig cfg = load_config(args);
    auto tok = cfg.tokenizer();
    CorpusStore store = load_jsonl(cfg.corpus_input(), *tok, cfg.quality_map(), cfg.doc_type_map());

    CategoryKey category = cfg.category();
    const json& run = cfg.effective().value("run", json::object());
    std::string rid = run.value("id", "");
    if (rid.empty()) throw ConfigError("run.id (or --run-id) is required for deploy");
    fs::path runs_root = run.value("runs_root", "runs");
    fs::path pool_path = runs_root / rid / category.slug() / "strategy_pool.json";
    if (!fs::exists(pool_path)) {
        throw ConfigError("no strategy pool for run id \"" + rid + "\" at " + pool_path.string());
    }
    StrategyPool pool = load_strategy_pool(pool_path);
    const StrategyRecord& best = best_strategy(pool);

    ChatClient cleaner_client(cfg.endpoint("cleaner"));
    DeployOptions options = cfg.deploy_options();
    fs::path out_path = out_override.empty() ? cfg.deploy_out() : fs::path(out_override);

    DeployStats stats = resume_only
                            ? resume(best, store, category, cleaner_client, *tok, out_path, options)
                            : deploy(best, store, category, cleaner_client, *tok, out_path, options);
    std::cout << "deployed strategy iteration " << best.iteration << " -> " << out_path.string()
              << "\n"
              << stats.to_json().dump(2) << "\n";
    if (!stats.complete) {
        std::cout << "deployment incomplete; re-invoke to resume from checkpoint\n";
    }
    return 0;
}

int cmd_metrics(const GlobalArgs& g, const std::string& raw_path, const std::string& cleaned_path) {
    FileConfig cfg = load_config(g);
    auto tok = cfg.tokenizer();
    auto raw = read_documents_jsonl(raw_path, *tok);
    auto cleaned = read_documents_jsonl(cleaned_path, *tok);
    if (raw.size() < 2 || cleaned.size() < 2) {
        throw ValidationError("metrics need at least 2 documents per file");
    }

    std::map<std::string, const Document*> raw_by_id;
    for (const auto& d : raw) raw_by_id[d.id] = &d;
    for (const auto& d : cleaned) {
        if (!raw_by_id.count(d.id)) {
            throw ValidationError("pairing error: cleaned document id \"" + d.id +
                                  "\" not present in raw file");
        }
    }

    const std::size_t dim = cfg.metrics_embed_dimension();
    const std::size_t refs = cfg.metrics_rouge_refs();
    const std::uint64_t seed = cfg.metrics_seed();

    RougeResult rouge_raw = self_rouge2(raw, *tok, refs, seed);
    RougeResult rouge_cleaned = self_rouge2(cleaned, *tok, refs, seed);
    double entropy_raw = shannon_entropy(TokenDistribution::from_docs(raw, *tok));
    double entropy_cleaned = shannon_entropy(TokenDistribution::from_docs(cleaned, *tok));

    auto embed_all = [&](const std::vector<Document>& docs) {
        std::vector<EmbeddingVector> out;
        out.reserve(docs.size());
        for (const auto& d : docs) out.push_back(hash_embed(d.text, *tok, dim, seed));
        return out;
    };
    double l2_raw = mean_pairwise_l2(embed_all(raw));
    double l2_cleaned = mean_pairwise_l2(embed_all(cleaned));

    // original vs cleaned, paired by id
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(cleaned.size());
    for (const auto& d : cleaned) pairs.emplace_back(raw_by_id.at(d.id)->text, d.text);
    auto provider = hashed_provider(*tok, dim, seed);
    SimilarityReport sim = similarity_report(pairs, provider);

    // random baseline: unrelated documents paired via a seeded derangement
    std::vector<std::size_t> perm(cleaned.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(seed + 1);
    rng.shuffle(perm);
    std::vector<std::pair<std::string, std::string>> baseline_pairs;
    baseline_pairs.reserve(cleaned.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        std::size_t a = perm[i];
        std::size_t b = perm[(i + 1) % perm.size()];
        baseline_pairs.emplace_back(raw_by_id.at(cleaned[a].id)->text, cleaned[b].text);
    }
    SimilarityReport baseline = similarity_report(baseline_pairs, provider);

    char buf[512];
    std::string report;
    report += "corpus diversity and semantic preservation report\n";
    report += "==================================================\n\n";
    report += "formulas\n";
    report += "  self-rouge-2: mean over documents of the max bigram F1 against k sampled\n";
    report += "                reference documents (seeded, sampled by document id)\n";
    report += "  shannon entropy: -sum p log2 p over the corpus token distribution (bits)\n";
    report += "  l2 distance: mean Euclidean distance over all unordered embedding pairs\n";
    report += "  similarity: cosine between hashed bigram embeddings of each (raw, cleaned) pair\n\n";
    std::snprintf(buf, sizeof(buf),
                  "parameters\n  rouge refs (k): %zu\n  embed dimension: %zu\n  seed: %llu\n"
                  "  tokenizer: %s\n\n",
                  refs, dim, static_cast<unsigned long long>(seed), tok->name().c_str());
    report += buf;
    std::snprintf(buf, sizeof(buf),
                  "values                         raw          cleaned\n"
                  "  self-rouge-2 (lower=more diverse)  %.6f     %.6f\n"
                  "  shannon entropy (bits)             %.6f    %.6f\n"
                  "  mean pairwise l2                   %.6f     %.6f\n",
                  rouge_raw.value, rouge_cleaned.value, entropy_raw, entropy_cleaned, l2_raw,
                  l2_cleaned);
    report += buf;
    std::snprintf(buf, sizeof(buf),
                  "  short docs (<2 tokens): raw %zu, cleaned %zu\n\n", rouge_raw.short_docs,
                  rouge_cleaned.short_docs);
    report += buf;
    std::snprintf(buf, sizeof(buf),
                  "semantic similarity (original vs cleaned, %zu pairs, %zu excluded)\n"
                  "  mean %.6f  stddev %.6f  p5 %.6f  p50 %.6f  p95 %.6f\n",
                  sim.pair_count, sim.excluded, sim.mean, sim.stddev, sim.p5, sim.p50, sim.p95);
    report += buf;
    std::snprintf(buf, sizeof(buf),
                  "random-pairing baseline (%zu pairs)\n  mean %.6f  stddev %.6f\n",
                  baseline.pair_count, baseline.mean, baseline.stddev);
    report += buf;

    atomic_write_file(cfg.metrics_report_path(), report);
    // histogram CSV: cleaned-vs-raw and the random baseline side by side
    std::string csv = "bin_lo,bin_hi,pairs,random_baseline\n";
    for (std::size_t i = 0; i < sim.histogram.size(); ++i) {
        double lo = -1.0 + 0.01 * static_cast<double>(i);
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%llu,%llu\n", lo, lo + 0.01,
                      static_cast<unsigned long long>(sim.histogram[i]),
                      static_cast<unsigned long long>(baseline.histogram[i]));
        csv += buf;
    }
    atomic_write_file(cfg.metrics_histogram_path(), csv);

    std::cout << report;
    std::cout << "report written to " << cfg.metrics_report_path().string() << "\n";
    std::cout << "histogram written to " << cfg.metrics_histogram_path().string() << "\n";
    return 0;
}

int cmd_report(const GlobalArgs& g, const std::string& category_slug, const std::string& run_id) {
    GlobalArgs args = g;
    args.quiet_config = true;
    if (!category_slug.empty()) args.overrides.push_back("category=" + category_slug);
    if (!run_id.empty()) args.overrides.push_back("run.id=" + run_id);
    FileConfig cfg = load_config(args);

    const json& run = cfg.effective().value("run", json::object());
    std::string rid = run.value("id", "");
    if (rid.empty()) throw ConfigError("run.id (or --run-id) is required for report");
    fs::path dir = fs::path(run.value("runs_root", "runs")) / rid / cfg.category().slug();
    if (!fs::exists(dir / "manifest.json")) {
        throw ConfigError("no manifest at " + (dir / "manifest.json").string());
    }
    RunManifest manifest = RunManifest::from_json(json::parse(read_file(dir / "manifest.json")));

    std::printf("run %s, category %s\n", manifest.run_id.c_str(), manifest.category_slug.c_str());
    if (manifest.initialization) {
        std::printf("initialization: %llu experiences seeded\n",
                    manifest.initialization->value("experiences", 0ULL));
    }
    std::printf("%5s %9s %12s %12s %8s %7s\n", "iter", "score", "experiences", "strategies",
                "dropped", "parent");
    for (const auto& r : manifest.reports) {
        if (r.failed) {
            std::printf("%5llu %9s %12zu %12zu %8s %7s  %s\n",
                        static_cast<unsigned long long>(r.iteration), "FAILED",
                        r.experience_after, r.strategy_pool_size, "-", "-", r.error.c_str());
        } else {
            std::printf("%5llu %9.4f %12zu %12zu %8zu %7s%s\n",
                        static_cast<unsigned long long>(r.iteration), r.score.value_or(0.0),
                        r.experience_after, r.strategy_pool_size, r.dropped_docs,
                        r.parent_iteration ? std::to_string(*r.parent_iteration).c_str() : "-",
                        manifest.selected_best && *manifest.selected_best == r.iteration
                            ? "  <- selected best"
                            : "");
        }
    }
    if (!manifest.selected_best) std::printf("run incomplete (no best selected yet)\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evolve per-category cleaning strategies with LLM agents and deploy the best"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("-c,--config", g.config_path, "run-config file (JSON)");
    app.add_option("-s,--set", g.overrides, "override config values, e.g. -s run.iterations=3");
    app.add_flag("-q,--quiet-config", g.quiet_config, "do not print the effective config");

    auto* classify = app.add_subcommand("classify", "partition a JSONL corpus into categories");
    std::string out_dir = "classified";
    classify->add_option("--out-dir", out_dir, "output directory for per-category JSONL");

    auto* evolve = app.add_subcommand("evolve", "run the evolutionary loop for one category");
    std::string evolve_category;
    evolve->add_option("--category", evolve_category, "category slug, e.g. academic-high-medicine");
    int evolve_iterations = -1;
    evolve->add_option("--iterations", evolve_iterations, "override run.iterations");

    auto* deploy_cmd = app.add_subcommand("deploy", "apply the best strategy to the full category");
    std::string deploy_category, deploy_run_id, deploy_out;
    bool deploy_resume = false;
    deploy_cmd->add_option("--category", deploy_category, "category slug");
    deploy_cmd->add_option("--run-id", deploy_run_id, "evolution run id holding the strategy pool");
    deploy_cmd->add_option("--out", deploy_out, "output JSONL path (overrides deploy.out)");
    deploy_cmd->add_flag("--resume", deploy_resume, "require an existing checkpoint");

    auto* metrics_cmd = app.add_subcommand("metrics", "diversity and similarity report");
    std::string raw_path, cleaned_path;
    metrics_cmd->add_option("--raw", raw_path, "raw corpus JSONL")->required();
    metrics_cmd->add_option("--cleaned", cleaned_path, "cleaned corpus JSONL")->required();

    auto* report_cmd = app.add_subcommand("report", "summarize an evolution run");
    std::string report_category, report_run_id;
    report_cmd->add_option("--category", report_category, "category slug");
    report_cmd->add_option("--run-id", report_run_id, "run id");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (classify->parsed()) return cmd_classify(g, out_dir);
        if (evolve->parsed()) {
            if (evolve_iterations >= 0) {
                g.overrides.push_back("run.iterations=" + std::to_string(evolve_iterations));
            }
            return cmd_evolve(g, evolve_category);
        }
        if (deploy_cmd->parsed()) {
            return cmd_deploy(g, deploy_category, deploy_run_id, deploy_out, deploy_resume);
        }
        if (metrics_cmd->parsed()) return cmd_metrics(g, raw_path, cleaned_path);
        if (report_cmd->parsed()) return cmd_report(g, report_category, report_run_id);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const CorpusError& e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return 3;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 4;
    } catch (const RequestError& e) {
        std::cerr << "request error: " << e.what() << "\n";
        return 4;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}
