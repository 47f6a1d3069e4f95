#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace evoclean {

// The six agent templates plus the two historical-section fragments the
// designer user prompt embeds. The embedded copies are the reference; a
// directory override must match them byte-for-byte.
struct PromptAssets {
    std::string observer_system;
    std::string observer_user;
    std::string designer_system;
    std::string designer_user;
    std::string designer_history_best;
    std::string designer_history_first;
    std::string judge_system;
    std::string judge_user;
};

const PromptAssets& embedded_prompts();

// name -> fnv1a64 hex of the embedded asset bytes.
std::map<std::string, std::string> prompt_checksums();

// Loads *.txt from a directory and verifies each file against the embedded
// reference; any drift raises ValidationError naming the file.
PromptAssets load_prompts_dir(const std::filesystem::path& dir);

// Installs/exports the embedded assets to a directory (used by packaging and
// by tests that want the files on disk).
void write_prompts_dir(const std::filesystem::path& dir);

std::string replace_all(std::string text, std::string_view token, std::string_view value);

}  // namespace evoclean
