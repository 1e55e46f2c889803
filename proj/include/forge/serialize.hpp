#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "forge/schema.hpp"
#include "forge/text.hpp"

namespace forge {

// Flattened model input: [<s>] question ... [</s>] col tokens [</s>] col
// tokens [</s>] ...  Column segments follow schema declaration order
// (table-major).  Each anchor records the index of the separator right
// after that column's tokens; that separator position stands in for the
// column in downstream scoring.
struct SerializedInput {
    std::vector<std::string> tokens;
    std::pair<std::size_t, std::size_t> question_span;  // half-open
    std::vector<std::pair<ColumnId, std::size_t>> column_anchors;

    bool operator==(const SerializedInput&) const = default;
};

SerializedInput serialize_input(const Question& question, const Schema& schema);

// Column-name tokens as they appear in the serialized input ('_'/'-' split
// into words, lowercased).
std::vector<std::string> column_name_tokens(const Column& column);

}  // namespace forge
