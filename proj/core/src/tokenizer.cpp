#include "evoclean/tokenizer.hpp"

#include "evoclean/errors.hpp"

namespace evoclean {

std::shared_ptr<Tokenizer> make_tokenizer(const std::string& name) {
    if (name == "whitespace" || name.empty()) {
        return std::make_shared<WhitespaceTokenizer>();
    }
    throw ConfigError("unknown tokenizer \"" + name + "\" (available: whitespace)");
}

}  // namespace evoclean
