#include "evoclean/prompts.hpp"

#include <array>
#include <fstream>

#include "evoclean/errors.hpp"
#include "evoclean/hash.hpp"
#include "evoclean/jsonio.hpp"
#include "prompts_data.hpp"

namespace evoclean {

namespace {

struct AssetRef {
    const char* name;
    std::string_view bytes;
    std::string PromptAssets::*field;
};

const std::array<AssetRef, 8>& asset_refs() {
    static const std::array<AssetRef, 8> refs = {{
        {"observer_system", prompt_assets::observer_system, &PromptAssets::observer_system},
        {"observer_user", prompt_assets::observer_user, &PromptAssets::observer_user},
        {"designer_system", prompt_assets::designer_system, &PromptAssets::designer_system},
        {"designer_user", prompt_assets::designer_user, &PromptAssets::designer_user},
        {"designer_history_best", prompt_assets::designer_history_best,
         &PromptAssets::designer_history_best},
        {"designer_history_first", prompt_assets::designer_history_first,
         &PromptAssets::designer_history_first},
        {"judge_system", prompt_assets::judge_system, &PromptAssets::judge_system},
        {"judge_user", prompt_assets::judge_user, &PromptAssets::judge_user},
    }};
    return refs;
}

}  // namespace

const PromptAssets& embedded_prompts() {
    static const PromptAssets assets = [] {
        PromptAssets a;
        for (const auto& ref : asset_refs()) a.*ref.field = std::string(ref.bytes);
        return a;
    }();
    return assets;
}

std::map<std::string, std::string> prompt_checksums() {
    std::map<std::string, std::string> out;
    for (const auto& ref : asset_refs()) out[ref.name] = hex64(fnv1a64(ref.bytes));
    return out;
}

PromptAssets load_prompts_dir(const std::filesystem::path& dir) {
    PromptAssets assets;
    for (const auto& ref : asset_refs()) {
        auto path = dir / (std::string(ref.name) + ".txt");
        std::string bytes = read_file(path);
        if (bytes != ref.bytes) {
            throw ValidationError("prompt asset " + path.string() +
                                  " does not match the shipped template (checksum " +
                                  hex64(fnv1a64(bytes)) + " != " + hex64(fnv1a64(ref.bytes)) + ")");
        }
        assets.*ref.field = std::move(bytes);
    }
    return assets;
}

void write_prompts_dir(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& ref : asset_refs()) {
        atomic_write_file(dir / (std::string(ref.name) + ".txt"), std::string(ref.bytes));
    }
}

std::string replace_all(std::string text, std::string_view token, std::string_view value) {
    if (token.empty()) return text;
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        auto hit = text.find(token, pos);
        if (hit == std::string::npos) {
            out.append(text, pos, text.size() - pos);
            return out;
        }
        out.append(text, pos, hit - pos);
        out.append(value);
        pos = hit + token.size();
    }
}

}  // namespace evoclean
