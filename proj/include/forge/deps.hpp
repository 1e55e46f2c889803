#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/schema.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

// Closed 17-type inventory. None marks the absence of a dependency and is
// never stored on an edge; the other 16 group into seven clause families.
enum class DependencyType {
    None = 0,
    SelectMention,
    SelectAgg,
    JoinMention,
    WhereMention,
    WhereOp,
    WhereValue,
    GroupByMention,
    GroupByAgg,
    HavingMention,
    HavingAgg,
    HavingOp,
    HavingValue,
    OrderByMention,
    OrderByAgg,
    OrderByOrder,
    LimitValue,
};

inline constexpr std::size_t kDependencyTypeCount = 17;

std::string_view dependency_type_name(DependencyType t);  // "SELECT-Agg", ...
DependencyType dependency_type_from_name(std::string_view name);

// Reserved head name for LIMIT values, which modify no column.
inline constexpr std::string_view kLimitHead = "__limit__";

// Half-open token index range into a question.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const Span&) const = default;
    auto operator<=>(const Span&) const = default;
};

struct DepHead {
    bool is_limit = false;
    ColumnId column;  // meaningless when is_limit

    static DepHead limit() { return {true, {}}; }
    static DepHead col(ColumnId id) { return {false, id}; }
    std::string name(const Schema& schema) const {
        return is_limit ? std::string(kLimitHead) : schema.qualified_name(column);
    }
    bool operator==(const DepHead&) const = default;
};

struct DependencyEdge {
    DepHead head;
    Span span;  // non-empty
    DependencyType label = DependencyType::None;  // never None on stored edges
    double score = 1.0;  // match confidence in (0,1]

    bool operator==(const DependencyEdge&) const = default;
};

struct DependencyGraph {
    std::vector<DependencyEdge> edges;

    // Appends unless the (head, span, label) triple is already present.
    void add(const DependencyEdge& e);
    bool operator==(const DependencyGraph&) const = default;
};

enum class SpanKind { Name, AggTrigger, OpTrigger, OrderTrigger, Value };

// One (column, clause role) occurrence pulled out of an AST. LIMIT yields a
// pseudo-record with has_column = false and the limit number as its value.
struct MentionRecord {
    bool has_column = true;
    ColumnRef column;
    Clause clause = Clause::Select;
    Agg agg = Agg::None;
    std::optional<CmpOp> op;
    std::optional<OrderDir> dir;
    std::vector<Literal> values;  // 1 for plain ops, 2 for BETWEEN
};

// Phrase lists cueing aggregations, comparison operators, and sort orders.
// Shipped as a versioned data file so the word lists can be revised without
// touching code; builtin() is the compiled-in copy of that file.
struct TriggerLexicon {
    std::map<Agg, std::vector<std::string>> agg;
    std::map<CmpOp, std::vector<std::string>> op;      // GT, LT, NEQ
    std::map<OrderDir, std::vector<std::string>> order;

    static const TriggerLexicon& builtin();
    static TriggerLexicon from_json(const nlohmann::json& doc);
    static TriggerLexicon from_file(const std::string& path);
    nlohmann::ordered_json to_json() const;

    bool operator==(const TriggerLexicon&) const = default;
};

std::size_t levenshtein(std::string_view a, std::string_view b);

struct NgramMatch {
    Span span;
    double distance = 0.0;  // normalized to [0,1]
};

// Best fuzzy occurrence of `phrase` in the question: scans windows of
// 1..len(phrase tokens)+2 tokens, scoring char-level Levenshtein distance
// between the space-joined window and the normalized phrase divided by
// max(window length, phrase length). Returns the minimum-distance window
// if its distance <= tau; ties prefer longer windows, then leftmost.
std::optional<NgramMatch> ngram_match(const Question& question, std::string_view phrase,
                                      double tau);

std::vector<MentionRecord> extract_mentions(const SqlAst& ast);

// Deterministic (record, span kind) -> label mapping; throws
// ContractViolation for incompatible pairs (e.g. AggTrigger with agg None).
DependencyType classify_mention(const MentionRecord& record, SpanKind kind);

// targets counts every span the labeler tried to ground (column names, agg
// triggers, lexicon-covered op triggers, order triggers, values); matched
// counts the ones that produced an edge.
struct LabelStats {
    std::size_t targets = 0;
    std::size_t matched = 0;
};

DependencyGraph derive_dependencies(const Question& question, const SqlAst& ast,
                                    const Schema& schema, double tau,
                                    const TriggerLexicon& lexicon = TriggerLexicon::builtin(),
                                    LabelStats* stats = nullptr);

inline constexpr double kDefaultTau = 0.3;

}  // namespace forge
