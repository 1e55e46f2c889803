#include "forge/serialize.hpp"

namespace forge {

std::vector<std::string> column_name_tokens(const Column& column) {
    return tokenize(normalize_phrase(column.name));
}

SerializedInput serialize_input(const Question& question, const Schema& schema) {
    SerializedInput out;
    out.tokens.push_back(std::string(kStartToken));
    out.question_span = {1, 1 + question.tokens.size()};
    for (const std::string& t : question.tokens) out.tokens.push_back(t);
    out.tokens.push_back(std::string(kSepToken));
    for (std::size_t ti = 0; ti < schema.tables.size(); ++ti) {
        for (std::size_t ci = 0; ci < schema.tables[ti].columns.size(); ++ci) {
            for (std::string& t : column_name_tokens(schema.tables[ti].columns[ci]))
                out.tokens.push_back(std::move(t));
            out.tokens.push_back(std::string(kSepToken));
            out.column_anchors.push_back({ColumnId{ti, ci}, out.tokens.size() - 1});
        }
    }
    return out;
}

}  // namespace forge
