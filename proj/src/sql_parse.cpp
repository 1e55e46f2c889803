#include <algorithm>
#include <cctype>

#include "forge/error.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

struct Tok {
    enum Kind { Word, Number, String, Sym, End };
    Kind kind = End;
    std::string text;  // words lowercased; strings unquoted/unescaped
    std::size_t pos = 0;
};

std::vector<Tok> lex(std::string_view s) {
    std::vector<Tok> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    auto word_char = [](unsigned char c) { return std::isalnum(c) != 0 || c == '_'; };
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(c) || (c == '-' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            ++i;
            while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i + 1 < n && s[i] == '.' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
                i += 2;
                while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            out.push_back({Tok::Number, std::string(s.substr(start, i - start)), start});
        } else if (std::isalpha(c) || c == '_') {
            ++i;
            while (i < n && word_char(static_cast<unsigned char>(s[i]))) ++i;
            out.push_back({Tok::Word, to_lower(s.substr(start, i - start)), start});
        } else if (c == '\'') {
            ++i;
            std::string text;
            bool closed = false;
            while (i < n) {
                if (s[i] == '\'') {
                    if (i + 1 < n && s[i + 1] == '\'') {  // doubled quote
                        text += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                text += s[i++];
            }
            if (!closed) throw ParseError("unterminated string literal", start);
            out.push_back({Tok::String, std::move(text), start});
        } else if (c == '<' && i + 1 < n && (s[i + 1] == '=' || s[i + 1] == '>')) {
            out.push_back({Tok::Sym, std::string(s.substr(i, 2)), start});
            i += 2;
        } else if ((c == '>' || c == '!') && i + 1 < n && s[i + 1] == '=') {
            out.push_back({Tok::Sym, std::string(s.substr(i, 2)), start});
            i += 2;
        } else if (std::string_view("()*,.=<>").find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back({Tok::Sym, std::string(1, static_cast<char>(c)), start});
            ++i;
        } else {
            throw ParseError("unexpected character '" + std::string(1, static_cast<char>(c)) + "'", start);
        }
    }
    out.push_back({Tok::End, "", n});
    return out;
}

std::optional<Agg> agg_from_word(const std::string& w) {
    if (w == "max") return Agg::Max;
    if (w == "min") return Agg::Min;
    if (w == "count") return Agg::Count;
    if (w == "avg") return Agg::Avg;
    if (w == "sum") return Agg::Sum;
    return std::nullopt;
}

// Unresolved "[agg(] [table.]column [)]" or star form.
struct RawTarget {
    Agg agg = Agg::None;
    bool star = false;
    std::string table;  // may be empty
    std::string column;
    std::size_t pos = 0;
};

class Parser {
public:
    Parser(std::string_view text, const Schema& schema) : toks_(lex(text)), schema_(schema) {}

    SqlAst parse() {
        SqlAst ast = parse_query(1);
        expect_end();
        return ast;
    }

private:
    std::vector<Tok> toks_;
    std::size_t i_ = 0;
    const Schema& schema_;

    const Tok& cur() const { return toks_[i_]; }
    void advance() { if (cur().kind != Tok::End) ++i_; }

    bool at_kw(std::string_view kw) const { return cur().kind == Tok::Word && cur().text == kw; }

    bool eat_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        advance();
        return true;
    }

    void expect_kw(std::string_view kw) {
        if (!eat_kw(kw)) throw ParseError("expected keyword " + to_upper(kw), cur().pos);
    }

    bool eat_sym(std::string_view s) {
        if (cur().kind == Tok::Sym && cur().text == s) {
            advance();
            return true;
        }
        return false;
    }

    void expect_sym(std::string_view s) {
        if (!eat_sym(s)) throw ParseError("expected '" + std::string(s) + "'", cur().pos);
    }

    void expect_end() {
        if (cur().kind != Tok::End) throw ParseError("trailing input after query", cur().pos);
    }

    static std::string to_upper(std::string_view s) {
        std::string out(s);
        for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return out;
    }

    std::string expect_name(const char* what) {
        if (cur().kind != Tok::Word) throw ParseError(std::string("expected ") + what, cur().pos);
        std::string name = cur().text;
        advance();
        return name;
    }

    RawTarget parse_target(bool allow_star) {
        RawTarget t;
        t.pos = cur().pos;
        if (eat_sym("*")) {
            if (!allow_star) throw ParseError("'*' not allowed here", t.pos);
            t.star = true;
            return t;
        }
        if (cur().kind == Tok::Word) {
            if (auto agg = agg_from_word(cur().text)) {
                // Lookahead: "count" etc. could also be a column name.
                if (toks_[i_ + 1].kind == Tok::Sym && toks_[i_ + 1].text == "(") {
                    advance();
                    expect_sym("(");
                    if (eat_sym("*")) {
                        if (*agg != Agg::Count)
                            throw ParseError("'*' argument requires COUNT", t.pos);
                        if (!allow_star) throw ParseError("'*' not allowed here", t.pos);
                        t.agg = *agg;
                        t.star = true;
                        expect_sym(")");
                        return t;
                    }
                    t.agg = *agg;
                    parse_column_name(t);
                    expect_sym(")");
                    return t;
                }
            }
        }
        parse_column_name(t);
        return t;
    }

    void parse_column_name(RawTarget& t) {
        t.pos = cur().pos;
        std::string first = expect_name("column name");
        if (eat_sym(".")) {
            t.table = first;
            t.column = expect_name("column name after '.'");
        } else {
            t.column = first;
        }
    }

    ColumnRef resolve(const RawTarget& t, const std::vector<std::size_t>& scope) const {
        if (!t.table.empty()) {
            ColumnId id;
            if (!schema_.find_column(t.table, t.column, &id)) {
                std::size_t ti;
                if (!schema_.find_table(t.table, &ti))
                    throw ParseError("unknown table '" + t.table + "'", t.pos);
                throw ParseError("unknown column '" + t.table + "." + t.column + "'", t.pos);
            }
            if (std::find(scope.begin(), scope.end(), id.table) == scope.end())
                throw ParseError("table '" + t.table + "' is not in the FROM/JOIN scope", t.pos);
            return ColumnRef::make(schema_, id);
        }
        const std::string want = to_lower(t.column);
        std::optional<ColumnId> hit;
        for (std::size_t ti : scope) {
            for (std::size_t ci = 0; ci < schema_.table(ti).columns.size(); ++ci) {
                if (to_lower(schema_.table(ti).columns[ci].name) == want) {
                    if (hit) throw ParseError("ambiguous column '" + t.column + "'", t.pos);
                    hit = ColumnId{ti, ci};
                }
            }
        }
        if (!hit) throw ParseError("unknown column '" + t.column + "'", t.pos);
        return ColumnRef::make(schema_, *hit);
    }

    // Literal type expected on the value side of a comparison.
    DataType value_type(Agg agg, bool star, const ColumnRef& col) const {
        if (star || agg == Agg::Count || agg == Agg::Avg || agg == Agg::Sum) return DataType::Number;
        return schema_.column(col.id).type;
    }

    Literal parse_literal(DataType expected) {
        const Tok& t = cur();
        if (t.kind == Tok::Number) {
            if (expected != DataType::Number)
                throw ParseError("number literal where a text value is required", t.pos);
            Literal lit = Literal::number(t.text);
            advance();
            return lit;
        }
        if (t.kind == Tok::String) {
            if (expected != DataType::Text)
                throw ParseError("text literal where a number is required", t.pos);
            Literal lit = Literal::str(t.text);
            advance();
            return lit;
        }
        throw ParseError("expected a literal value", t.pos);
    }

    Condition parse_condition(const std::vector<std::size_t>& scope, bool allow_agg,
                              std::size_t depth) {
        RawTarget raw = parse_target(allow_agg);
        Condition cond;
        cond.agg = raw.agg;
        cond.star = raw.star;
        if (raw.star && raw.agg != Agg::Count)
            throw ParseError("bare '*' cannot head a condition", raw.pos);
        if (!allow_agg && raw.agg != Agg::None)
            throw ParseError("aggregation not allowed in WHERE", raw.pos);
        if (!raw.star) cond.column = resolve(raw, scope);
        const DataType expect = value_type(cond.agg, cond.star, cond.column);

        const Tok& t = cur();
        if (t.kind == Tok::Sym) {
            if (eat_sym("=")) cond.op = CmpOp::Eq;
            else if (eat_sym("!=") || eat_sym("<>")) cond.op = CmpOp::Neq;
            else if (eat_sym("<=")) cond.op = CmpOp::Le;
            else if (eat_sym(">=")) cond.op = CmpOp::Ge;
            else if (eat_sym("<")) cond.op = CmpOp::Lt;
            else if (eat_sym(">")) cond.op = CmpOp::Gt;
            else throw ParseError("expected a comparison operator", t.pos);
            cond.value = parse_literal(expect);
            return cond;
        }
        if (eat_kw("like")) {
            cond.op = CmpOp::Like;
            if (expect != DataType::Text)
                throw ParseError("LIKE applies to text values only", t.pos);
            cond.value = parse_literal(DataType::Text);
            return cond;
        }
        if (eat_kw("between")) {
            cond.op = CmpOp::Between;
            cond.value = parse_literal(expect);
            expect_kw("and");
            cond.value2 = parse_literal(expect);
            return cond;
        }
        bool negated = false;
        if (eat_kw("not")) {
            expect_kw("in");
            negated = true;
        } else if (!eat_kw("in")) {
            throw ParseError("expected a comparison operator", t.pos);
        }
        cond.op = negated ? CmpOp::NotIn : CmpOp::In;
        const std::size_t open_pos = cur().pos;
        expect_sym("(");
        if (depth + 1 > kMaxSubqueryDepth)
            throw ParseError("subquery nesting deeper than " + std::to_string(kMaxSubqueryDepth),
                             open_pos);
        cond.subquery = std::make_shared<SqlAst>(parse_query(depth + 1));
        expect_sym(")");
        return cond;
    }

    SqlAst parse_query(std::size_t depth) {
        SqlAst ast;
        ast.schema_id = schema_.schema_id;
        expect_kw("select");
        std::vector<RawTarget> raw_select;
        raw_select.push_back(parse_target(true));
        while (eat_sym(",")) raw_select.push_back(parse_target(true));

        expect_kw("from");
        std::vector<std::size_t> scope;
        {
            const std::size_t pos = cur().pos;
            const std::string name = expect_name("table name");
            std::size_t ti;
            if (!schema_.find_table(name, &ti)) throw ParseError("unknown table '" + name + "'", pos);
            scope.push_back(ti);
            ast.from_tables.push_back(TableRef::make(schema_, ti));
        }
        while (at_kw("join")) {
            const std::size_t pos = cur().pos;
            advance();
            const std::string name = expect_name("table name after JOIN");
            std::size_t ti;
            if (!schema_.find_table(name, &ti)) throw ParseError("unknown table '" + name + "'", pos);
            if (std::find(scope.begin(), scope.end(), ti) != scope.end())
                throw ParseError("table '" + name + "' joined twice", pos);
            scope.push_back(ti);
            expect_kw("on");
            Join j;
            j.table = TableRef::make(schema_, ti);
            RawTarget lt = parse_target(false);
            expect_sym("=");
            RawTarget rt = parse_target(false);
            if (lt.agg != Agg::None || rt.agg != Agg::None)
                throw ParseError("aggregation not allowed in ON", pos);
            j.left = resolve(lt, scope);
            j.right = resolve(rt, scope);
            const bool touches_new = j.left.id.table == ti || j.right.id.table == ti;
            const bool linked = schema_.is_foreign_key(j.left.id, j.right.id) ||
                                j.left.column_name == j.right.column_name;
            if (!touches_new || j.left.id.table == j.right.id.table)
                throw ParseError("ON clause must connect the joined table to the scope", pos);
            if (!linked)
                throw ParseError("ON columns are neither a foreign key nor share a name", pos);
            ast.joins.push_back(std::move(j));
        }

        for (const RawTarget& raw : raw_select) {
            SelectItem item;
            item.agg = raw.agg;
            item.star = raw.star;
            if (raw.star && raw.agg == Agg::None && raw_select.size() != 1)
                throw ParseError("'*' must be the only select item", raw.pos);
            if (!raw.star) item.column = resolve(raw, scope);
            ast.select_items.push_back(std::move(item));
        }

        if (eat_kw("where")) {
            ast.where.push_back(parse_condition(scope, false, depth));
            while (eat_kw("and")) ast.where.push_back(parse_condition(scope, false, depth));
        }
        if (at_kw("group")) {
            advance();
            expect_kw("by");
            do {
                RawTarget raw = parse_target(false);
                GroupItem g;
                g.agg = raw.agg;
                g.column = resolve(raw, scope);
                ast.group_by.push_back(std::move(g));
            } while (eat_sym(","));
        }
        if (at_kw("having")) {
            const std::size_t pos = cur().pos;
            if (ast.group_by.empty())
                throw ParseError("HAVING requires a GROUP BY clause", pos);
            advance();
            ast.having.push_back(parse_condition(scope, true, depth));
            while (eat_kw("and")) ast.having.push_back(parse_condition(scope, true, depth));
        }
        if (at_kw("order")) {
            advance();
            expect_kw("by");
            RawTarget raw = parse_target(false);
            OrderBy ob;
            ob.agg = raw.agg;
            ob.column = resolve(raw, scope);
            ob.dir = OrderDir::Asc;
            if (eat_kw("desc")) ob.dir = OrderDir::Desc;
            else eat_kw("asc");
            ast.order_by = std::move(ob);
        }
        if (eat_kw("limit")) {
            const Tok& t = cur();
            if (t.kind != Tok::Number || t.text.find('.') != std::string::npos ||
                t.text.front() == '-')
                throw ParseError("LIMIT takes a non-negative integer", t.pos);
            ast.limit = std::stoll(t.text);
            advance();
        }
        return ast;
    }
};

}  // namespace

SqlAst parse_sql(std::string_view text, const Schema& schema) {
    return Parser(text, schema).parse();
}

}  // namespace forge
