#include <algorithm>
#include <cstdlib>
#include <iterator>
#include <utility>

#include "forge/error.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

const char* kSyntheticWords[] = {"alpha", "bravo", "charlie", "delta",
                                 "echo",  "foxtrot", "golf",  "hotel"};

bool agg_applies(Agg agg, DataType type) {
    if (agg == Agg::Count) return true;  // counting works for any column
    return type == DataType::Number;
}

double as_number(const Literal& lit) { return std::strtod(lit.text.c_str(), nullptr); }

}  // namespace

SqlSampler::SqlSampler(const Schema& schema, const GrammarConfig& config)
    : schema_(schema), config_(config), rng_(config.seed) {
    config_.validate();
    if (schema_.column_count() == 0) throw Error("sampler: schema has no columns");
    for (std::size_t f = 0; f < schema_.column_count(); ++f) {
        if (schema_.column(schema_.from_flat(f)).type == DataType::Number)
            number_columns_.push_back(f);
    }
    const bool count_allowed = config_.allowed_aggs.count(Agg::Count) > 0;
    if (config_.agg_probability >= 1.0 && !count_allowed && number_columns_.empty())
        throw Error("unsatisfiable grammar config: aggregation is mandatory but schema '" +
                    schema_.schema_id + "' has no number columns and COUNT is not allowed");
}

SqlAst SqlSampler::next() { return sample_query(1); }

ColumnRef SqlSampler::pick_column(const std::vector<std::size_t>& scope_tables) {
    std::vector<ColumnId> pool;
    for (std::size_t ti : scope_tables) {
        for (std::size_t ci = 0; ci < schema_.table(ti).columns.size(); ++ci)
            pool.push_back({ti, ci});
    }
    return ColumnRef::make(schema_, pool[rng_.below(pool.size())]);
}

Literal SqlSampler::pick_value(const ColumnRef& col) {
    const Column& c = schema_.column(col.id);
    if (!c.values.empty()) return {c.type, c.values[rng_.below(c.values.size())]};
    if (c.type == DataType::Number) return Literal::number(std::to_string(rng_.range(0, 100)));
    return Literal::str(kSyntheticWords[rng_.below(std::size(kSyntheticWords))]);
}

Condition SqlSampler::sample_condition(const std::vector<std::size_t>& scope_tables,
                                       std::size_t depth) {
    Condition cond;
    cond.column = pick_column(scope_tables);
    const DataType type = schema_.column(cond.column.id).type;

    if (depth < kMaxSubqueryDepth && rng_.bernoulli(config_.subquery_probability)) {
        // col IN (SELECT other FROM t2): pull any type-compatible column,
        // preferring one different from the left-hand side.
        std::vector<ColumnId> targets;
        for (std::size_t f = 0; f < schema_.column_count(); ++f) {
            ColumnId id = schema_.from_flat(f);
            if (schema_.column(id).type == type && !(id == cond.column.id)) targets.push_back(id);
        }
        if (targets.empty()) targets.push_back(cond.column.id);
        ColumnId target = targets[rng_.below(targets.size())];
        auto sub = std::make_shared<SqlAst>();
        sub->schema_id = schema_.schema_id;
        sub->from_tables.push_back(TableRef::make(schema_, target.table));
        sub->select_items.push_back({Agg::None, false, ColumnRef::make(schema_, target)});
        if (rng_.bernoulli(0.3)) {
            Condition inner;
            inner.column = pick_column({target.table});
            const DataType itype = schema_.column(inner.column.id).type;
            if (itype == DataType::Number) {
                const CmpOp ops[] = {CmpOp::Eq, CmpOp::Neq, CmpOp::Lt, CmpOp::Gt};
                inner.op = ops[rng_.below(std::size(ops))];
            } else {
                const CmpOp ops[] = {CmpOp::Eq, CmpOp::Neq};
                inner.op = ops[rng_.below(std::size(ops))];
            }
            inner.value = pick_value(inner.column);
            sub->where.push_back(std::move(inner));
        }
        cond.op = rng_.bernoulli(0.5) ? CmpOp::In : CmpOp::NotIn;
        cond.subquery = std::move(sub);
        return cond;
    }

    if (type == DataType::Number) {
        const CmpOp ops[] = {CmpOp::Eq,  CmpOp::Neq, CmpOp::Lt,     CmpOp::Gt,
                             CmpOp::Le,  CmpOp::Ge,  CmpOp::Between};
        cond.op = ops[rng_.below(std::size(ops))];
    } else {
        const CmpOp ops[] = {CmpOp::Eq, CmpOp::Neq, CmpOp::Like};
        cond.op = ops[rng_.below(std::size(ops))];
    }
    cond.value = pick_value(cond.column);
    if (cond.op == CmpOp::Between) {
        cond.value2 = pick_value(cond.column);
        if (as_number(cond.value2) < as_number(cond.value)) std::swap(cond.value, cond.value2);
    }
    return cond;
}

SqlAst SqlSampler::sample_query(std::size_t depth) {
    SqlAst ast;
    ast.schema_id = schema_.schema_id;
    const auto& clauses = config_.clauses;

    std::vector<std::size_t> scope;
    scope.push_back(rng_.below(schema_.tables.size()));
    ast.from_tables.push_back(TableRef::make(schema_, scope[0]));

    if (clauses.count(Clause::Join) && schema_.tables.size() > 1) {
        for (std::size_t j = 0; j < config_.max_joins; ++j) {
            if (!rng_.bernoulli(config_.join_probability)) break;
            // Enumerate every legal bridge (scope column, new-table column).
            struct Bridge { std::size_t table; ColumnId left, right; };
            std::vector<Bridge> bridges;
            for (std::size_t ti = 0; ti < schema_.tables.size(); ++ti) {
                if (std::find(scope.begin(), scope.end(), ti) != scope.end()) continue;
                for (std::size_t si : scope) {
                    for (std::size_t sc = 0; sc < schema_.table(si).columns.size(); ++sc) {
                        for (std::size_t nc = 0; nc < schema_.table(ti).columns.size(); ++nc) {
                            ColumnId a{si, sc}, b{ti, nc};
                            const bool shared = to_lower(schema_.column(a).name) ==
                                                to_lower(schema_.column(b).name);
                            if (shared || schema_.is_foreign_key(a, b))
                                bridges.push_back({ti, a, b});
                        }
                    }
                }
            }
            if (bridges.empty()) break;
            const Bridge& pick = bridges[rng_.below(bridges.size())];
            Join join;
            join.table = TableRef::make(schema_, pick.table);
            join.left = ColumnRef::make(schema_, pick.left);
            join.right = ColumnRef::make(schema_, pick.right);
            scope.push_back(pick.table);
            ast.joins.push_back(std::move(join));
        }
    }

    // Enumerated in scope order so draws are stable.
    auto agg_pairs = [&]() {
        std::vector<std::pair<ColumnId, Agg>> pairs;
        for (std::size_t ti : scope) {
            for (std::size_t ci = 0; ci < schema_.table(ti).columns.size(); ++ci) {
                ColumnId id{ti, ci};
                for (Agg a : {Agg::Max, Agg::Min, Agg::Count, Agg::Avg, Agg::Sum}) {
                    if (!config_.allowed_aggs.count(a)) continue;
                    if (!agg_applies(a, schema_.column(id).type)) continue;
                    pairs.push_back({id, a});
                }
            }
        }
        return pairs;
    };

    if (rng_.bernoulli(config_.star_probability)) {
        ast.select_items.push_back({Agg::None, true, {}});
    } else {
        const std::size_t k = rng_.range(1, config_.max_select_items);
        for (std::size_t i = 0; i < k; ++i) {
            SelectItem item;
            if (rng_.bernoulli(config_.agg_probability)) {
                auto pairs = agg_pairs();
                if (!pairs.empty()) {
                    const auto& p = pairs[rng_.below(pairs.size())];
                    item.agg = p.second;
                    item.column = ColumnRef::make(schema_, p.first);
                    ast.select_items.push_back(std::move(item));
                    continue;
                }
            }
            item.column = pick_column(scope);
            ast.select_items.push_back(std::move(item));
        }
    }

    if (clauses.count(Clause::Where) && rng_.bernoulli(config_.where_probability)) {
        const std::size_t k = rng_.range(1, config_.max_conditions);
        for (std::size_t i = 0; i < k; ++i) ast.where.push_back(sample_condition(scope, depth));
    }

    if (clauses.count(Clause::GroupBy) && rng_.bernoulli(config_.group_by_probability)) {
        std::vector<ColumnId> pool;
        for (std::size_t ti : scope)
            for (std::size_t ci = 0; ci < schema_.table(ti).columns.size(); ++ci)
                pool.push_back({ti, ci});
        rng_.shuffle(pool);
        std::size_t k = 1;
        if (pool.size() > 1 && rng_.bernoulli(0.25)) k = 2;
        for (std::size_t i = 0; i < k; ++i) {
            GroupItem g;
            g.column = ColumnRef::make(schema_, pool[i]);
            if (rng_.bernoulli(config_.group_agg_probability)) {
                std::vector<Agg> aggs;
                for (Agg a : {Agg::Max, Agg::Min, Agg::Count, Agg::Avg, Agg::Sum}) {
                    if (config_.allowed_aggs.count(a) && agg_applies(a, schema_.column(pool[i]).type))
                        aggs.push_back(a);
                }
                if (!aggs.empty()) g.agg = aggs[rng_.below(aggs.size())];
            }
            ast.group_by.push_back(std::move(g));
        }

        if (clauses.count(Clause::Having) && rng_.bernoulli(config_.having_probability)) {
            const bool count_allowed = config_.allowed_aggs.count(Agg::Count) > 0;
            Condition cond;
            bool built = false;
            const std::uint64_t form = rng_.below(4);
            if (form <= 1 && count_allowed) {  // HAVING COUNT(*) ...
                cond.agg = Agg::Count;
                cond.star = true;
                const CmpOp ops[] = {CmpOp::Eq, CmpOp::Gt, CmpOp::Ge, CmpOp::Lt,
                                     CmpOp::Le, CmpOp::Between};
                cond.op = ops[rng_.below(std::size(ops))];
                cond.value = Literal::number(std::to_string(rng_.range(1, 5)));
                if (cond.op == CmpOp::Between) {
                    cond.value2 = Literal::number(std::to_string(rng_.range(1, 5)));
                    if (as_number(cond.value2) < as_number(cond.value))
                        std::swap(cond.value, cond.value2);
                }
                built = true;
            } else if (form == 2) {  // HAVING AGG(col) ...
                auto pairs = agg_pairs();
                if (!pairs.empty()) {
                    const auto& p = pairs[rng_.below(pairs.size())];
                    cond.agg = p.second;
                    cond.column = ColumnRef::make(schema_, p.first);
                    const CmpOp ops[] = {CmpOp::Eq, CmpOp::Gt, CmpOp::Lt, CmpOp::Ge, CmpOp::Le};
                    cond.op = ops[rng_.below(std::size(ops))];
                    if (cond.agg == Agg::Max || cond.agg == Agg::Min)
                        cond.value = pick_value(cond.column);
                    else
                        cond.value = Literal::number(std::to_string(rng_.range(1, 50)));
                    built = true;
                }
            }
            if (!built) {  // HAVING on a grouped column, no aggregation
                cond.column = ast.group_by[rng_.below(ast.group_by.size())].column;
                const DataType type = schema_.column(cond.column.id).type;
                if (type == DataType::Number) {
                    const CmpOp ops[] = {CmpOp::Eq, CmpOp::Gt, CmpOp::Lt};
                    cond.op = ops[rng_.below(std::size(ops))];
                } else {
                    const CmpOp ops[] = {CmpOp::Eq, CmpOp::Neq};
                    cond.op = ops[rng_.below(std::size(ops))];
                }
                cond.value = pick_value(cond.column);
            }
            ast.having.push_back(std::move(cond));
        }
    }

    if (clauses.count(Clause::OrderBy) && rng_.bernoulli(config_.order_by_probability)) {
        OrderBy ob;
        ob.column = pick_column(scope);
        if (rng_.bernoulli(config_.agg_probability)) {
            std::vector<Agg> aggs;
            for (Agg a : {Agg::Max, Agg::Min, Agg::Count, Agg::Avg, Agg::Sum}) {
                if (config_.allowed_aggs.count(a) && agg_applies(a, schema_.column(ob.column.id).type))
                    aggs.push_back(a);
            }
            if (!aggs.empty()) ob.agg = aggs[rng_.below(aggs.size())];
        }
        ob.dir = rng_.bernoulli(0.5) ? OrderDir::Desc : OrderDir::Asc;
        ast.order_by = std::move(ob);
    }

    if (clauses.count(Clause::Limit) && rng_.bernoulli(config_.limit_probability)) {
        ast.limit = static_cast<std::int64_t>(rng_.range(1, 10));
    }

    return ast;
}

SqlAst sample_sql(const Schema& schema, const GrammarConfig& config) {
    return SqlSampler(schema, config).next();
}

}  // namespace forge
