#include <algorithm>

#include "forge/error.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

std::string_view agg_name(Agg a) {
    switch (a) {
        case Agg::None: return "";
        case Agg::Max: return "MAX";
        case Agg::Min: return "MIN";
        case Agg::Count: return "COUNT";
        case Agg::Avg: return "AVG";
        case Agg::Sum: return "SUM";
    }
    return "";
}

std::string_view cmp_op_symbol(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Neq: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Gt: return ">";
        case CmpOp::Le: return "<=";
        case CmpOp::Ge: return ">=";
        case CmpOp::Like: return "LIKE";
        case CmpOp::Between: return "BETWEEN";
        case CmpOp::In: return "IN";
        case CmpOp::NotIn: return "NOT IN";
    }
    return "";
}

std::string_view order_dir_name(OrderDir d) {
    return d == OrderDir::Asc ? "ASC" : "DESC";
}

std::string_view clause_name(Clause c) {
    switch (c) {
        case Clause::Select: return "SELECT";
        case Clause::Join: return "JOIN";
        case Clause::Where: return "WHERE";
        case Clause::GroupBy: return "GROUP_BY";
        case Clause::Having: return "HAVING";
        case Clause::OrderBy: return "ORDER_BY";
        case Clause::Limit: return "LIMIT";
    }
    return "";
}

Clause clause_from_name(std::string_view name) {
    std::string key = to_lower(name);
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "select") return Clause::Select;
    if (key == "join") return Clause::Join;
    if (key == "where") return Clause::Where;
    if (key == "group_by" || key == "groupby") return Clause::GroupBy;
    if (key == "having") return Clause::Having;
    if (key == "order_by" || key == "orderby") return Clause::OrderBy;
    if (key == "limit") return Clause::Limit;
    throw Error("unknown clause name '" + std::string(name) + "'");
}

TableRef TableRef::make(const Schema& schema, std::size_t index) {
    return {index, to_lower(schema.table(index).name)};
}

ColumnRef ColumnRef::make(const Schema& schema, ColumnId id) {
    return {id, to_lower(schema.table(id.table).name), to_lower(schema.column(id).name)};
}

bool Condition::operator==(const Condition& o) const {
    if (agg != o.agg || star != o.star || op != o.op) return false;
    if (!star && !(column == o.column)) return false;
    if (!(value == o.value) || !(value2 == o.value2)) return false;
    if (!subquery != !o.subquery) return false;
    if (subquery && !(*subquery == *o.subquery)) return false;
    return true;
}

std::size_t SqlAst::depth() const {
    std::size_t d = 1;
    for (const auto* conds : {&where, &having}) {
        for (const Condition& c : *conds) {
            if (c.subquery) d = std::max(d, 1 + c.subquery->depth());
        }
    }
    return d;
}

bool SqlAst::has_clause(Clause c) const {
    switch (c) {
        case Clause::Select: return !select_items.empty();
        case Clause::Join: return !joins.empty();
        case Clause::Where: return !where.empty();
        case Clause::GroupBy: return !group_by.empty();
        case Clause::Having: return !having.empty();
        case Clause::OrderBy: return order_by.has_value();
        case Clause::Limit: return limit.has_value();
    }
    return false;
}

void GrammarConfig::validate() const {
    if (max_select_items < 1) throw Error("grammar config: max_select_items must be >= 1");
    if (max_conditions < 1) throw Error("grammar config: max_conditions must be >= 1");
    for (auto [v, name] : {std::pair<double, const char*>{subquery_probability, "subquery_probability"},
                           {where_probability, "where_probability"},
                           {group_by_probability, "group_by_probability"},
                           {having_probability, "having_probability"},
                           {order_by_probability, "order_by_probability"},
                           {limit_probability, "limit_probability"},
                           {join_probability, "join_probability"},
                           {agg_probability, "agg_probability"},
                           {group_agg_probability, "group_agg_probability"},
                           {star_probability, "star_probability"}}) {
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(std::string("grammar config: ") + name + " must be in [0,1]");
    }
    if (clauses.find(Clause::Select) == clauses.end())
        throw Error("grammar config: clause set must contain select");
}

}  // namespace forge
