#include "forge/error.hpp"
#include "forge/sql.hpp"

namespace forge {

namespace {

std::string render_literal(const Literal& lit) {
    if (lit.type == DataType::Number) return lit.text;
    std::string out = "'";
    for (char c : lit.text) {
        out += c;
        if (c == '\'') out += '\'';  // escape by doubling
    }
    out += "'";
    return out;
}

std::string render_target(Agg agg, bool star, const ColumnRef& col) {
    if (star) {
        if (agg == Agg::None) return "*";
        return std::string(agg_name(agg)) + "(*)";
    }
    if (agg == Agg::None) return col.qualified();
    return std::string(agg_name(agg)) + "(" + col.qualified() + ")";
}

std::string render_condition(const Condition& c) {
    std::string out = render_target(c.agg, c.star, c.column);
    switch (c.op) {
        case CmpOp::Between:
            out += " BETWEEN " + render_literal(c.value) + " AND " + render_literal(c.value2);
            break;
        case CmpOp::In:
        case CmpOp::NotIn:
            if (!c.subquery) throw ContractViolation("IN condition without subquery");
            out += std::string(" ") + std::string(cmp_op_symbol(c.op)) + " (" + render_sql(*c.subquery) + ")";
            break;
        default:
            out += std::string(" ") + std::string(cmp_op_symbol(c.op)) + " " + render_literal(c.value);
            break;
    }
    return out;
}

}  // namespace

std::string render_sql(const SqlAst& ast) {
    if (ast.select_items.empty()) throw ContractViolation("render_sql: empty select list");
    if (ast.from_tables.empty()) throw ContractViolation("render_sql: empty from list");
    std::string out = "SELECT ";
    for (std::size_t i = 0; i < ast.select_items.size(); ++i) {
        if (i > 0) out += ", ";
        const SelectItem& it = ast.select_items[i];
        out += render_target(it.agg, it.star, it.column);
    }
    out += " FROM " + ast.from_tables.front().name;
    for (const Join& j : ast.joins) {
        out += " JOIN " + j.table.name + " ON " + j.left.qualified() + " = " + j.right.qualified();
    }
    if (!ast.where.empty()) {
        out += " WHERE ";
        for (std::size_t i = 0; i < ast.where.size(); ++i) {
            if (i > 0) out += " AND ";
            out += render_condition(ast.where[i]);
        }
    }
    if (!ast.group_by.empty()) {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < ast.group_by.size(); ++i) {
            if (i > 0) out += ", ";
            out += render_target(ast.group_by[i].agg, false, ast.group_by[i].column);
        }
    }
    if (!ast.having.empty()) {
        out += " HAVING ";
        for (std::size_t i = 0; i < ast.having.size(); ++i) {
            if (i > 0) out += " AND ";
            out += render_condition(ast.having[i]);
        }
    }
    if (ast.order_by) {
        out += " ORDER BY " + render_target(ast.order_by->agg, false, ast.order_by->column) + " " +
               std::string(order_dir_name(ast.order_by->dir));
    }
    if (ast.limit) out += " LIMIT " + std::to_string(*ast.limit);
    return out;
}

}  // namespace forge
