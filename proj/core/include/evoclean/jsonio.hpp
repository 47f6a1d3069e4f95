#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace evoclean {

using json = nlohmann::json;

// Canonical serialization: sorted keys (nlohmann object order), two-space
// indent, UTF-8, single trailing "\n". Pools and manifests round-trip
// byte-identically through this.
std::string canonical_dump(const json& j);

// Round-half-away-from-zero to 4 decimal places; scores are canonicalized
// through this before serialization.
double round4(double v);

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename. The temp file lives next to the target so the
// rename stays on one filesystem.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Calls fn(line_number, parsed_object) for every non-empty line.
// Malformed JSON raises CorpusError naming the line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

}  // namespace evoclean
