#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace evoclean {

enum class ContentType { academic, code, fragment, social_media, text };
enum class QualityTier { high, not_high };
enum class Domain { human_social, mathematics, computer_science, medicine, other_stem };

const char* to_string(ContentType v);
const char* to_string(QualityTier v);
const char* to_string(Domain v);

std::optional<ContentType> content_type_from_string(const std::string& s);
std::optional<QualityTier> quality_tier_from_string(const std::string& s);
std::optional<Domain> domain_from_string(const std::string& s);

// (content_type, quality, domain) triple identifying one evolution unit.
struct CategoryKey {
    ContentType content_type;
    QualityTier quality;
    Domain domain;

    bool operator==(const CategoryKey&) const = default;
    bool operator<(const CategoryKey& o) const {
        if (content_type != o.content_type) return content_type < o.content_type;
        if (quality != o.quality) return quality < o.quality;
        return domain < o.domain;
    }

    // Filesystem-safe token, e.g. "academic-high-medicine".
    std::string slug() const;
};

std::optional<CategoryKey> category_from_slug(const std::string& slug);

struct Document {
    std::string id;
    std::string text;
    std::optional<int> fdc_code;
    std::string doc_type;    // raw label, mapped to ContentType via config
    std::string quality;     // raw label, mapped to QualityTier via config
    std::uint64_t token_count = 0;
};

}  // namespace evoclean
