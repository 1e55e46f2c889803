#include "forge/text.hpp"

#include <cctype>

namespace forge {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Letters, digits, '_' and any non-ASCII byte (so UTF-8 sequences stay in
// one token).
bool is_word(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (is_digit(c)) {
            // Numeral: digits with at most one interior decimal point.
            ++i;
            while (i < n && is_digit(static_cast<unsigned char>(text[i]))) ++i;
            if (i + 1 < n && text[i] == '.' && is_digit(static_cast<unsigned char>(text[i + 1]))) {
                i += 2;
                while (i < n && is_digit(static_cast<unsigned char>(text[i]))) ++i;
            }
        } else if (is_word(c)) {
            ++i;
            while (i < n && is_word(static_cast<unsigned char>(text[i]))) ++i;
        } else {
            // Punctuation: one character per token.
            ++i;
        }
        tokens.push_back(to_lower(text.substr(start, i - start)));
    }
    return tokens;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(tokens[i]);
    }
    return out;
}

std::string normalize_phrase(std::string_view s) {
    std::string cleaned(s);
    for (char& c : cleaned) {
        if (c == '_' || c == '-') c = ' ';
    }
    return join(tokenize(cleaned), " ");
}

Question Question::from_text(std::string_view text) {
    Question q;
    q.raw = std::string(text);
    q.tokens = tokenize(text);
    return q;
}

}  // namespace forge
