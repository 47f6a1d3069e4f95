#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace evoclean {

// Pluggable token counting. Token totals in manifests and reports are always
// labeled with name() so numbers from different tokenizers never get mixed.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
    virtual std::size_t count(std::string_view text) const { return tokenize(text).size(); }
};

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::string name() const override { return "whitespace"; }

    std::vector<std::string> tokenize(std::string_view text) const override {
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && is_space(text[i])) ++i;
            std::size_t start = i;
            while (i < text.size() && !is_space(text[i])) ++i;
            if (i > start) out.emplace_back(text.substr(start, i - start));
        }
        return out;
    }

    std::size_t count(std::string_view text) const override {
        std::size_t n = 0;
        bool in_token = false;
        for (char c : text) {
            bool sp = is_space(c);
            if (!sp && !in_token) ++n;
            in_token = !sp;
        }
        return n;
    }

private:
    static bool is_space(char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }
};

std::shared_ptr<Tokenizer> make_tokenizer(const std::string& name);

}  // namespace evoclean
