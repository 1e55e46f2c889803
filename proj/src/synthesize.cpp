#include "forge/error.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

std::string target_phrase(Agg agg, bool star, const ColumnRef& col) {
    const std::string name = star ? "" : normalize_phrase(col.column_name);
    switch (agg) {
        case Agg::None: return star ? "everything" : "the " + name;
        case Agg::Max: return "the maximum " + name;
        case Agg::Min: return "the minimum " + name;
        case Agg::Count: return star ? "the number of rows" : "the number of " + name;
        case Agg::Avg: return "the average " + name;
        case Agg::Sum: return "the total " + name;
    }
    return name;
}

std::string condition_phrase(const Condition& c, const Schema& schema) {
    std::string out = target_phrase(c.agg, c.star, c.column);
    switch (c.op) {
        case CmpOp::Eq: out += " is " + c.value.text; break;
        case CmpOp::Neq: out += " is not " + c.value.text; break;
        case CmpOp::Lt: out += " is less than " + c.value.text; break;
        case CmpOp::Gt: out += " is greater than " + c.value.text; break;
        case CmpOp::Le: out += " is at most " + c.value.text; break;
        case CmpOp::Ge: out += " is at least " + c.value.text; break;
        case CmpOp::Like: out += " is like " + c.value.text; break;
        case CmpOp::Between:
            out += " is between " + c.value.text + " and " + c.value2.text;
            break;
        case CmpOp::In:
            out += " is in (" + synthesize_question(*c.subquery, schema) + ")";
            break;
        case CmpOp::NotIn:
            out += " is not in (" + synthesize_question(*c.subquery, schema) + ")";
            break;
    }
    return out;
}

}  // namespace

std::string synthesize_question(const SqlAst& ast, const Schema& schema) {
    if (ast.select_items.empty() || ast.from_tables.empty())
        throw ContractViolation("synthesize_question: incomplete AST");
    const std::string table = normalize_phrase(ast.from_tables.front().name);

    std::string out = "show ";
    if (ast.select_items.size() == 1 && ast.select_items[0].star &&
        ast.select_items[0].agg == Agg::None) {
        out += "all rows of " + table;
    } else {
        for (std::size_t i = 0; i < ast.select_items.size(); ++i) {
            if (i > 0) out += " and ";
            const SelectItem& it = ast.select_items[i];
            out += target_phrase(it.agg, it.star, it.column);
        }
        out += " of " + table;
    }

    for (const Join& j : ast.joins) {
        out += " joined with " + normalize_phrase(j.table.name) + " on " +
               normalize_phrase(j.left.column_name) + " matching " +
               normalize_phrase(j.right.column_name);
    }

    if (!ast.where.empty()) {
        out += " where ";
        for (std::size_t i = 0; i < ast.where.size(); ++i) {
            if (i > 0) out += " and ";
            out += condition_phrase(ast.where[i], schema);
        }
    }

    if (!ast.group_by.empty()) {
        out += " grouped by ";
        for (std::size_t i = 0; i < ast.group_by.size(); ++i) {
            if (i > 0) out += " and ";
            const GroupItem& g = ast.group_by[i];
            if (g.agg == Agg::None) out += normalize_phrase(g.column.column_name);
            else out += target_phrase(g.agg, false, g.column);
        }
    }

    if (!ast.having.empty()) {
        out += " having ";
        for (std::size_t i = 0; i < ast.having.size(); ++i) {
            if (i > 0) out += " and ";
            out += condition_phrase(ast.having[i], schema);
        }
    }

    const char* dir_word = nullptr;
    if (ast.order_by)
        dir_word = ast.order_by->dir == OrderDir::Desc ? "descending" : "ascending";

    if (ast.order_by && ast.limit) {
        const OrderBy& ob = *ast.order_by;
        out += " with the top " + std::to_string(*ast.limit) + " by ";
        if (ob.agg == Agg::None) out += normalize_phrase(ob.column.column_name);
        else out += target_phrase(ob.agg, false, ob.column);
        out += std::string(" ") + dir_word;
    } else if (ast.order_by) {
        const OrderBy& ob = *ast.order_by;
        out += " ordered by ";
        if (ob.agg == Agg::None) out += normalize_phrase(ob.column.column_name);
        else out += target_phrase(ob.agg, false, ob.column);
        out += std::string(" ") + dir_word;
    } else if (ast.limit) {
        out += " with the top " + std::to_string(*ast.limit);
    }

    return out;
}

}  // namespace forge
