#include <doctest.h>

#include "fixtures.hpp"
#include "forge/error.hpp"
#include "forge/sql.hpp"

using namespace forge;

namespace {

SqlAst parse_on(const Schema& schema, const std::string& text) { return parse_sql(text, schema); }

}  // namespace

TEST_CASE("render produces canonical qualified SQL") {
    const Schema schema = fixtures::student_schema();
    SqlAst ast;
    ast.schema_id = schema.schema_id;
    ast.from_tables.push_back(TableRef::make(schema, 0));
    ast.select_items.push_back({Agg::Max, false, ColumnRef::make(schema, {0, 1})});
    CHECK(render_sql(ast) == "SELECT MAX(student.height) FROM student");

    ast.select_items[0] = {Agg::None, true, {}};
    ast.limit = 3;
    CHECK(render_sql(ast) == "SELECT * FROM student LIMIT 3");
}

TEST_CASE("parse round-trips hand-written queries") {
    const Schema schema = fixtures::school_schema();
    const char* queries[] = {
        "SELECT student.name FROM student",
        "SELECT MAX(student.height), student.name FROM student",
        "SELECT COUNT(*) FROM class",
        "SELECT student.name FROM student JOIN class ON student.class_id = class.class_id",
        "SELECT student.name FROM student WHERE student.height > 170",
        "SELECT student.name FROM student WHERE student.name = 'amy' AND student.height "
        "BETWEEN 160 AND 180",
        "SELECT student.name FROM student WHERE student.name LIKE 'a'",
        "SELECT student.class_id FROM student GROUP BY student.class_id HAVING COUNT(*) > 2",
        "SELECT student.class_id FROM student GROUP BY student.class_id HAVING "
        "AVG(student.height) >= 170",
        "SELECT student.name FROM student ORDER BY student.height DESC LIMIT 5",
        "SELECT student.name FROM student WHERE student.class_id IN (SELECT class.class_id "
        "FROM class)",
        "SELECT student.name FROM student WHERE student.class_id NOT IN (SELECT "
        "class.class_id FROM class WHERE class.size > 20)",
    };
    for (const char* q : queries) {
        CAPTURE(q);
        const SqlAst ast = parse_on(schema, q);
        CHECK(render_sql(ast) == q);
        CHECK(parse_on(schema, render_sql(ast)) == ast);
    }
}

TEST_CASE("parse accepts bare column names and lowercase keywords") {
    const Schema schema = fixtures::student_schema();
    const SqlAst ast = parse_on(schema, "select name from student where height > 170");
    CHECK(render_sql(ast) == "SELECT student.name FROM student WHERE student.height > 170");
}

TEST_CASE("parse rejects structural violations with positions") {
    const Schema schema = fixtures::school_schema();
    CHECK_THROWS_AS(parse_on(schema, "SELECT nope FROM student"), ParseError);
    CHECK_THROWS_AS(parse_on(schema, "SELECT name FROM student WHERE height = 'tall'"),
                    ParseError);  // number column, text literal
    CHECK_THROWS_AS(parse_on(schema, "SELECT name FROM student HAVING COUNT(*) > 1"),
                    ParseError);  // HAVING without GROUP BY
    CHECK_THROWS_AS(parse_on(schema, "SELECT name FROM student LIMIT -1"), ParseError);
    CHECK_THROWS_AS(parse_on(schema, "SELECT *, name FROM student"), ParseError);
    CHECK_THROWS_AS(parse_on(schema, "SELECT name FROM student JOIN class ON student.name = "
                                     "student.name"),
                    ParseError);  // join must link the new table
    CHECK_THROWS_AS(
        parse_on(schema,
                 "SELECT student.name FROM student WHERE student.class_id IN (SELECT "
                 "class.class_id FROM class WHERE class.class_id IN (SELECT class.class_id "
                 "FROM class))"),
        ParseError);  // subquery nesting beyond depth 2

    try {
        parse_on(schema, "SELECT nope FROM student");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position == 7);
    }
}

TEST_CASE("class_id is ambiguous across joined tables") {
    const Schema schema = fixtures::school_schema();
    CHECK_THROWS_AS(parse_on(schema, "SELECT class_id FROM student JOIN class ON "
                                     "student.class_id = class.class_id"),
                    ParseError);
}

TEST_CASE("sampler streams are deterministic per seed") {
    const Schema schema = fixtures::school_schema();
    GrammarConfig config;
    config.seed = 99;
    SqlSampler a(schema, config);
    SqlSampler b(schema, config);
    for (int i = 0; i < 50; ++i) CHECK(a.next() == b.next());

    config.seed = 100;
    SqlSampler c(schema, config);
    bool any_diff = false;
    SqlSampler a2(schema, {.seed = 99});
    for (int i = 0; i < 50; ++i) any_diff |= !(a2.next() == c.next());
    CHECK(any_diff);
}

TEST_CASE("sampled queries always parse back to themselves") {
    const Schema schema = fixtures::school_schema();
    GrammarConfig config;
    config.seed = 7;
    SqlSampler sampler(schema, config);
    for (int i = 0; i < 500; ++i) {
        const SqlAst ast = sampler.next();
        CAPTURE(render_sql(ast));
        CHECK(parse_on(schema, render_sql(ast)) == ast);
    }
}

TEST_CASE("grammar knobs constrain the sample space") {
    const Schema schema = fixtures::school_schema();

    GrammarConfig no_joins;
    no_joins.seed = 3;
    no_joins.max_joins = 0;
    SqlSampler s1(schema, no_joins);
    for (int i = 0; i < 200; ++i) CHECK(s1.next().joins.empty());

    GrammarConfig select_only;
    select_only.seed = 4;
    select_only.clauses = {Clause::Select};
    SqlSampler s2(schema, select_only);
    for (int i = 0; i < 200; ++i) {
        const SqlAst ast = s2.next();
        CHECK(ast.joins.empty());
        CHECK(ast.where.empty());
        CHECK(ast.group_by.empty());
        CHECK(ast.having.empty());
        CHECK(!ast.order_by.has_value());
        CHECK(!ast.limit.has_value());
    }

    GrammarConfig config;
    config.seed = 5;
    config.clauses = {Clause::Select, Clause::Where};
    config.max_conditions = 1;
    SqlSampler s3(schema, config);
    for (int i = 0; i < 200; ++i) CHECK(s3.next().where.size() <= 1);
}

TEST_CASE("unsatisfiable aggregation config is rejected up front") {
    Schema schema;
    schema.schema_id = "textonly";
    schema.tables.push_back({"notes", {{"body", DataType::Text, {}}}});
    schema.validate();
    GrammarConfig config;
    config.seed = 1;
    config.agg_probability = 1.0;
    config.allowed_aggs = {Agg::Max};  // no number column anywhere, no COUNT
    CHECK_THROWS_AS(SqlSampler(schema, config), Error);
}

TEST_CASE("compose merges single-table schemas on shared column names") {
    Schema a;
    a.schema_id = "students";
    a.tables.push_back({"student", {{"name", DataType::Text, {}},
                                    {"class_id", DataType::Number, {}}}});
    Schema b;
    b.schema_id = "classes";
    b.tables.push_back({"class", {{"class_id", DataType::Number, {}},
                                  {"teacher", DataType::Text, {}}}});
    Schema c;
    c.schema_id = "rooms";
    c.tables.push_back({"room", {{"number", DataType::Number, {}}}});

    const std::vector<Schema> merged = compose_multitable({a, b, c});
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].schema_id == "students+classes");
    CHECK(merged[0].tables.size() == 2);
    REQUIRE(merged[0].foreign_keys.size() == 1);
    CHECK(merged[0].is_foreign_key({0, 1}, {1, 0}));
    CHECK(merged[1].schema_id == "rooms");
    CHECK(merged[1] == c);
}

TEST_CASE("compose refuses multi-table inputs and table-name clashes") {
    CHECK_THROWS_AS(compose_multitable({fixtures::school_schema()}), ContractViolation);

    Schema a;
    a.schema_id = "a";
    a.tables.push_back({"log", {{"id", DataType::Number, {}}}});
    Schema b;
    b.schema_id = "b";
    b.tables.push_back({"log", {{"id", DataType::Number, {}}}});
    const std::vector<Schema> merged = compose_multitable({a, b});
    REQUIRE(merged.size() == 2);  // same table name: groups stay apart
    CHECK(merged[0] == a);
    CHECK(merged[1] == b);
}

TEST_CASE("synthesized questions carry the mentioned columns and values verbatim") {
    const Schema schema = fixtures::student_schema();
    SqlAst ast;
    ast.schema_id = schema.schema_id;
    ast.from_tables.push_back(TableRef::make(schema, 0));
    ast.select_items.push_back({Agg::Max, false, ColumnRef::make(schema, {0, 1})});
    Condition cond;
    cond.column = ColumnRef::make(schema, {0, 0});
    cond.op = CmpOp::Eq;
    cond.value = Literal::str("amy");
    ast.where.push_back(cond);

    const std::string q = synthesize_question(ast, schema);
    CHECK(q.find("height") != std::string::npos);
    CHECK(q.find("name") != std::string::npos);
    CHECK(q.find("amy") != std::string::npos);
    CHECK(q.find("maximum") != std::string::npos);
}
