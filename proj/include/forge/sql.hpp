#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/rng.hpp"
#include "forge/schema.hpp"

namespace forge {

enum class Agg { None, Max, Min, Count, Avg, Sum };
enum class CmpOp { Eq, Neq, Lt, Gt, Le, Ge, Like, Between, In, NotIn };
enum class OrderDir { Asc, Desc };
enum class Clause { Select, Join, Where, GroupBy, Having, OrderBy, Limit };

std::string_view agg_name(Agg a);          // "MAX", ... ("" for None)
std::string_view cmp_op_symbol(CmpOp op);  // "=", "!=", "BETWEEN", ...
std::string_view order_dir_name(OrderDir d);
std::string_view clause_name(Clause c);    // "SELECT", "GROUP_BY", ...
Clause clause_from_name(std::string_view name);  // case-insensitive, accepts "group_by"/"group-by"

// SQL literal. Text literals render single-quoted; number literals bare.
struct Literal {
    DataType type = DataType::Text;
    std::string text;  // unquoted payload

    static Literal number(std::string_view digits) { return {DataType::Number, std::string(digits)}; }
    static Literal str(std::string_view s) { return {DataType::Text, std::string(s)}; }
    bool operator==(const Literal&) const = default;
};

struct TableRef {
    std::size_t index = 0;  // into schema.tables
    std::string name;       // lowercased table name

    static TableRef make(const Schema& schema, std::size_t index);
    bool operator==(const TableRef&) const = default;
};

struct ColumnRef {
    ColumnId id;
    std::string table_name;   // lowercased
    std::string column_name;  // lowercased

    static ColumnRef make(const Schema& schema, ColumnId id);
    std::string qualified() const { return table_name + "." + column_name; }
    bool operator==(const ColumnRef&) const = default;
};

struct SelectItem {
    Agg agg = Agg::None;
    bool star = false;   // SELECT * (agg None) or COUNT(*)
    ColumnRef column;    // ignored when star

    bool operator==(const SelectItem&) const = default;
};

struct SqlAst;

// One conjunct of a WHERE or HAVING clause. HAVING conditions may wrap the
// column in an aggregation, or use COUNT(*) with no column at all; WHERE
// conditions never aggregate.
struct Condition {
    Agg agg = Agg::None;  // HAVING only
    bool star = false;    // COUNT(*) (HAVING only); column unused
    ColumnRef column;
    CmpOp op = CmpOp::Eq;
    Literal value;                      // EQ..GE, LIKE; BETWEEN lower bound
    Literal value2;                     // BETWEEN upper bound
    std::shared_ptr<SqlAst> subquery;   // IN / NOT_IN only

    bool operator==(const Condition& o) const;  // deep-compares subquery
};

struct Join {
    TableRef table;   // table brought into scope
    ColumnRef left;   // ON left = right
    ColumnRef right;

    bool operator==(const Join&) const = default;
};

struct GroupItem {
    Agg agg = Agg::None;
    ColumnRef column;

    bool operator==(const GroupItem&) const = default;
};

struct OrderBy {
    Agg agg = Agg::None;
    ColumnRef column;
    OrderDir dir = OrderDir::Asc;

    bool operator==(const OrderBy&) const = default;
};

struct SqlAst {
    std::string schema_id;
    std::vector<SelectItem> select_items;
    std::vector<TableRef> from_tables;  // exactly one in this subset
    std::vector<Join> joins;
    std::vector<Condition> where;       // conjunction
    std::vector<GroupItem> group_by;
    std::vector<Condition> having;
    std::optional<OrderBy> order_by;
    std::optional<std::int64_t> limit;  // non-negative

    // 1 for a flat query, 2 when an IN/NOT-IN subquery is present, ...
    std::size_t depth() const;
    bool has_clause(Clause c) const;

    bool operator==(const SqlAst&) const = default;
};

inline constexpr std::size_t kMaxSubqueryDepth = 2;

// Throws ParseError (with character position) on syntax problems, unknown
// tables/columns, literal type mismatches, or nesting deeper than 2.
SqlAst parse_sql(std::string_view text, const Schema& schema);

// Canonical form: uppercase keywords, single spaces, table-qualified
// column names. parse_sql(render_sql(a)) == a structurally.
std::string render_sql(const SqlAst& ast);

struct GrammarConfig {
    std::size_t max_select_items = 3;
    std::size_t max_conditions = 2;
    std::size_t max_joins = 2;
    double subquery_probability = 0.15;
    std::set<Clause> clauses = {Clause::Select, Clause::Join,  Clause::Where,  Clause::GroupBy,
                                Clause::Having, Clause::OrderBy, Clause::Limit};
    std::uint64_t seed = 0;
    std::set<Agg> allowed_aggs = {Agg::Max, Agg::Min, Agg::Count, Agg::Avg, Agg::Sum};

    // Presence/shape probabilities. The source grammar gives no sampling
    // distribution, so these are explicit knobs with coverage-tested
    // defaults. where_probability defaults to 1 because the base rule
    // derivation is Select followed by Where.
    double where_probability = 1.0;
    double group_by_probability = 0.35;
    double having_probability = 0.5;  // given GROUP BY present
    double order_by_probability = 0.35;
    double limit_probability = 0.35;
    double join_probability = 0.5;  // chance of each additional join
    double agg_probability = 0.5;   // per select item
    double group_agg_probability = 0.15;
    double star_probability = 0.08;  // SELECT *

    void validate() const;  // throws Error on out-of-range fields
};

// Deterministic sampler; repeated next() calls walk one seeded stream.
class SqlSampler {
public:
    // Throws Error when the config cannot be satisfied on this schema
    // (agg_probability >= 1 with no applicable aggregation anywhere).
    SqlSampler(const Schema& schema, const GrammarConfig& config);

    SqlAst next();

private:
    const Schema& schema_;
    GrammarConfig config_;
    Rng rng_;
    std::vector<std::size_t> number_columns_;  // flat indices

    SqlAst sample_query(std::size_t depth);
    ColumnRef pick_column(const std::vector<std::size_t>& scope_tables);
    Literal pick_value(const ColumnRef& col);
    Condition sample_condition(const std::vector<std::size_t>& scope_tables, std::size_t depth);
};

// Single-shot convenience wrapper (first sample of the config's stream).
SqlAst sample_sql(const Schema& schema, const GrammarConfig& config);

// Groups single-table schemas whose tables share a case-insensitive column
// name; every shared-name pair inside a merged schema becomes a foreign
// key. Tables with no partner pass through as-is.
std::vector<Schema> compose_multitable(const std::vector<Schema>& schemas);

// Deterministic template realization of an AST as an English question.
// Every selected column name and every condition value appears verbatim.
std::string synthesize_question(const SqlAst& ast, const Schema& schema);

}  // namespace forge
