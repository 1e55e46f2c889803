#include <doctest.h>

#include "forge/text.hpp"

using namespace forge;

TEST_CASE("tokenize lowercases and splits on whitespace") {
    CHECK(tokenize("Show ALL  names") == std::vector<std::string>{"show", "all", "names"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("   \t\n ") == std::vector<std::string>{});
}

TEST_CASE("tokenize isolates punctuation but keeps identifiers and numbers") {
    CHECK(tokenize("who's there?") == std::vector<std::string>{"who", "'", "s", "there", "?"});
    CHECK(tokenize("class_id=3") == std::vector<std::string>{"class_id", "=", "3"});
    CHECK(tokenize("pi is 3.14, right") ==
          std::vector<std::string>{"pi", "is", "3.14", ",", "right"});
    CHECK(tokenize("v1.2.3") == std::vector<std::string>{"v1", ".", "2.3"});
}

TEST_CASE("join is the inverse of a single-space split") {
    CHECK(join({"a", "b", "c"}, " ") == "a b c");
    CHECK(join({}, " ") == "");
    CHECK(join({"only"}, ", ") == "only");
}

TEST_CASE("normalize_phrase flattens separators and case") {
    CHECK(normalize_phrase("Amount_of_Transaction") == "amount of transaction");
    CHECK(normalize_phrase("order-date") == "order date");
    CHECK(normalize_phrase("  HEIGHT ") == "height");
}

TEST_CASE("question keeps raw text alongside tokens") {
    const Question q = Question::from_text("How many ROWS?");
    CHECK(q.raw == "How many ROWS?");
    CHECK(q.tokens == std::vector<std::string>{"how", "many", "rows", "?"});
}
