#include "evoclean/types.hpp"

#include <array>

namespace evoclean {

const char* to_string(ContentType v) {
    switch (v) {
        case ContentType::academic: return "academic";
        case ContentType::code: return "code";
        case ContentType::fragment: return "fragment";
        case ContentType::social_media: return "social_media";
        case ContentType::text: return "text";
    }
    return "?";
}

const char* to_string(QualityTier v) {
    return v == QualityTier::high ? "high" : "not_high";
}

const char* to_string(Domain v) {
    switch (v) {
        case Domain::human_social: return "human_social";
        case Domain::mathematics: return "mathematics";
        case Domain::computer_science: return "computer_science";
        case Domain::medicine: return "medicine";
        case Domain::other_stem: return "other_stem";
    }
    return "?";
}

std::optional<ContentType> content_type_from_string(const std::string& s) {
    static const std::array<ContentType, 5> all = {ContentType::academic, ContentType::code,
                                                   ContentType::fragment, ContentType::social_media,
                                                   ContentType::text};
    for (auto v : all)
        if (s == to_string(v)) return v;
    return std::nullopt;
}

std::optional<QualityTier> quality_tier_from_string(const std::string& s) {
    if (s == "high") return QualityTier::high;
    if (s == "not_high") return QualityTier::not_high;
    return std::nullopt;
}

std::optional<Domain> domain_from_string(const std::string& s) {
    static const std::array<Domain, 5> all = {Domain::human_social, Domain::mathematics,
                                              Domain::computer_science, Domain::medicine,
                                              Domain::other_stem};
    for (auto v : all)
        if (s == to_string(v)) return v;
    return std::nullopt;
}

std::string CategoryKey::slug() const {
    std::string out = to_string(content_type);
    out += '-';
    out += to_string(quality);
    out += '-';
    out += to_string(domain);
    return out;
}

std::optional<CategoryKey> category_from_slug(const std::string& slug) {
    auto first = slug.find('-');
    if (first == std::string::npos) return std::nullopt;
    auto second = slug.find('-', first + 1);
    if (second == std::string::npos) return std::nullopt;
    auto ct = content_type_from_string(slug.substr(0, first));
    auto q = quality_tier_from_string(slug.substr(first + 1, second - first - 1));
    auto d = domain_from_string(slug.substr(second + 1));
    if (!ct || !q || !d) return std::nullopt;
    return CategoryKey{*ct, *q, *d};
}

}  // namespace evoclean
