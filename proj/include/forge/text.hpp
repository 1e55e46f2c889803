#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Sentinels used in serialized inputs. The separator doubles as the column
// anchor position.
inline constexpr const char* kStartToken = "<s>";
inline constexpr const char* kSepToken = "</s>";
inline constexpr const char* kMaskToken = "<mask>";

// Lowercasing word-level tokenizer: splits on whitespace, punctuation
// characters become single-character tokens, decimal numerals (123, 4.5)
// stay whole. '_' counts as a word character so identifiers survive intact.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view s);
std::string join(const std::vector<std::string>& tokens, std::string_view sep);

// Canonical phrase form for fuzzy matching: '_' and '-' become spaces, then
// tokenized and re-joined with single spaces. "Amount_of_Transaction" ->
// "amount of transaction".
std::string normalize_phrase(std::string_view s);

struct Question {
    std::string raw;
    std::vector<std::string> tokens;

    static Question from_text(std::string_view text);
    bool operator==(const Question&) const = default;
};

}  // namespace forge
