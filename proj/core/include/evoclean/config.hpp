#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evoclean/corpus.hpp"
#include "evoclean/deploy.hpp"
#include "evoclean/evolution.hpp"
#include "evoclean/jsonio.hpp"

namespace evoclean {

// The single run-config file (JSON) shared by all subcommands, with
// --set key=value overrides applied on top. Unknown keys are rejected.
class FileConfig {
public:
    static FileConfig load(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});
    static FileConfig from_json(json effective, const std::vector<std::string>& overrides = {});

    const json& effective() const { return effective_; }
    std::string pretty() const { return canonical_dump(effective_); }

    std::filesystem::path corpus_input() const;
    std::shared_ptr<Tokenizer> tokenizer() const;
    LabelMap quality_map() const;
    LabelMap doc_type_map() const;

    CategoryKey category() const;
    bool has_category() const;
    CategoryDescriptor descriptor() const;

    EndpointConfig endpoint(const std::string& role) const;
    RunConfig run_config() const;

    DeployOptions deploy_options() const;
    std::filesystem::path deploy_out() const;

    std::size_t metrics_embed_dimension() const;
    std::size_t metrics_rouge_refs() const;
    std::uint64_t metrics_seed() const;
    std::filesystem::path metrics_report_path() const;
    std::filesystem::path metrics_histogram_path() const;

    std::vector<std::string> artificial_markers() const;

private:
    json effective_;
};

// Example config with the documented defaults, used by `--print-config` and
// the docs.
json example_config();

}  // namespace evoclean
