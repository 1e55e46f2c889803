#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "forge/deps.hpp"
#include "forge/error.hpp"
#include "forge/rng.hpp"
#include "forge/sdp.hpp"
#include "gradcheck.hpp"

using namespace forge;

namespace {

SdpDims small_dims() {
    SdpDims d;
    d.h = 6;
    d.p = 4;
    d.vocab = 11;
    d.max_entities = 5;
    return d;
}

Mat random_mat(std::size_t rows, std::size_t cols, Rng& rng) {
    Mat m(rows, cols);
    for (double& v : m.a) v = rng.uniform(-1.0, 1.0);
    return m;
}

GoldGrid random_gold(std::size_t n, std::size_t m, Rng& rng) {
    GoldGrid g;
    g.n = n;
    g.m = m;
    g.edge = Mat(n, m);
    g.label.assign(n * m, 0);
    for (std::size_t i = 0; i < n * m; ++i) {
        g.edge.a[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
        g.label[i] = static_cast<int>(rng.below(kDependencyTypeCount));
    }
    return g;
}

}  // namespace

TEST_CASE("biaffine matches the closed form on a hand case") {
    const Vec x1{1.0, 2.0}, x2{3.0, 4.0};
    Mat U(2, 2);
    U(0, 0) = 1.0;
    U(1, 1) = 1.0;
    const Vec W{0.5, 0.5, 0.25, 0.25};
    // x1'Ux2 = 11, W(x1++x2) = 0.5 + 1 + 0.75 + 1 = 3.25, b = 1
    CHECK(biaffine(x1, x2, U, W, 1.0) == doctest::Approx(15.25));
    CHECK_THROWS_AS(biaffine(x1, {1.0}, U, W, 0.0), ContractViolation);
}

TEST_CASE("ffn_project applies relu on top of the affine map") {
    FfnBlock blk;
    blk.W = Mat(2, 2);
    blk.W(0, 0) = 1.0;
    blk.W(1, 0) = -1.0;
    blk.b = {0.5, 0.5};
    const Vec out = ffn_project({2.0, 0.0}, blk);
    CHECK(out == Vec{2.5, 0.0});  // second unit rectified away
}

TEST_CASE("token_bucket is a stable map into the vocabulary") {
    for (const char* tok : {"height", "the", "170", "<mask>", "</s>"}) {
        const std::size_t b = token_bucket(tok, 61);
        CHECK(b < 61);
        CHECK(token_bucket(tok, 61) == b);
    }
    CHECK(token_bucket("height", 61) != token_bucket("name", 61));
    CHECK_THROWS_AS(token_bucket("x", 0), ContractViolation);
}

TEST_CASE("toy_encode is deterministic with bounded values") {
    const Schema schema = fixtures::student_schema();
    const Question q = Question::from_text("show the height");
    const SerializedInput si = serialize_input(q, schema);
    Mat Q1, S1, Q2, S2;
    toy_encode(si, 8, 42, &Q1, &S1);
    toy_encode(si, 8, 42, &Q2, &S2);
    CHECK(Q1 == Q2);
    CHECK(S1 == S2);
    CHECK(Q1.rows == 3);
    CHECK(Q1.cols == 8);
    CHECK(S1.rows == 4);
    for (double v : Q1.a) CHECK(std::abs(v) <= 1.0);
    Mat Q3, S3;
    toy_encode(si, 8, 43, &Q3, &S3);
    CHECK(!(Q1 == Q3));
}

TEST_CASE("identical tokens in different neighborhoods encode differently") {
    const Schema schema = fixtures::student_schema();
    const SerializedInput si = serialize_input(Question::from_text("the cat saw the dog"), schema);
    Mat Q, S;
    toy_encode(si, 8, 1, &Q, &S);
    CHECK(!(Q.row(0) == Q.row(3)));  // both "the"
}

TEST_CASE("decide_edges includes the zero boundary") {
    PairScores scores;
    scores.edge_logits = Mat(1, 3);
    scores.edge_logits(0, 0) = -0.1;
    scores.edge_logits(0, 1) = 0.0;
    scores.edge_logits(0, 2) = 0.1;
    const auto edges = decide_edges(scores);
    CHECK(edges[0] == std::vector<bool>{false, true, true});
}

TEST_CASE("gold grids project edge spans onto the column axis") {
    const Schema schema = fixtures::student_schema();
    DependencyGraph g;
    g.add({DepHead::col({0, 1}), {7, 9}, DependencyType::SelectAgg, 1.0});
    g.add({DepHead::col({0, 1}), {1, 2}, DependencyType::SelectMention, 1.0});
    g.add({DepHead::limit(), {3, 4}, DependencyType::LimitValue, 1.0});  // skipped

    const GoldGrid grid = gold_from_graph(g, 12, schema.column_count(), schema);
    CHECK(grid.edge(7, 1) == 1.0);
    CHECK(grid.edge(8, 1) == 1.0);
    CHECK(grid.edge(1, 1) == 1.0);
    CHECK(grid.edge(3, 1) == 0.0);
    CHECK(grid.edge(3, 0) == 0.0);  // limit pseudo-edge leaves no trace
    CHECK(grid.label_at(7, 1) == static_cast<int>(DependencyType::SelectAgg));
    CHECK(grid.label_at(1, 1) == static_cast<int>(DependencyType::SelectMention));
    CHECK(grid.label_at(0, 0) == static_cast<int>(DependencyType::None));
}

TEST_CASE("uniform logits reproduce ln2 and ln17 losses") {
    PairScores scores;
    scores.edge_logits = Mat(2, 3);
    scores.label_logits = Tensor3(2, 3, kDependencyTypeCount);
    GoldGrid gold;
    gold.n = 2;
    gold.m = 3;
    gold.edge = Mat(2, 3);
    gold.label.assign(6, 4);

    const SdpLossParts parts = sdp_loss_from_scores(scores, gold);
    CHECK(parts.edge == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(parts.label - 2.833213344056216) < 1e-9);  // ln 17
}

TEST_CASE("sdp_loss gradients match central differences") {
    const SdpDims dims = small_dims();
    Rng rng(2024);
    for (int instance = 0; instance < 3; ++instance) {
        SdpParams params = SdpParams::init(dims, rng.next_u64());
        const Mat Q = random_mat(3, dims.h, rng);
        const Mat S = random_mat(2, dims.h, rng);
        if (gradcheck::min_abs_preactivation(Q, S, params) < 1e-3) continue;
        const GoldGrid gold = random_gold(3, 2, rng);

        SdpParams grads = SdpParams::zeros(dims);
        sdp_loss(Q, S, params, gold, &grads);

        std::vector<double> analytic, numeric;
        const std::vector<double*> p_entries = params.sdp_entries();
        const std::vector<double*> g_entries = grads.sdp_entries();
        auto loss = [&] { return sdp_loss(Q, S, params, gold); };
        for (std::size_t i = 0; i < p_entries.size(); ++i) {
            analytic.push_back(*g_entries[i]);
            numeric.push_back(gradcheck::central(p_entries[i], loss));
        }
        CHECK(gradcheck::rel_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("epr_loss checks its bijection contract and matches ln K") {
    Mat logits(3, 3);
    CHECK(epr_loss(logits, {2, 0, 1}) == doctest::Approx(std::log(3.0)));
    CHECK_THROWS_AS(epr_loss(logits, {0, 0, 1}), ContractViolation);
    CHECK_THROWS_AS(epr_loss(logits, {0, 1}), ContractViolation);
    CHECK(epr_loss(Mat(0, 0), {}) == 0.0);

    Rng rng(5);
    Mat random(4, 4);
    for (double& v : random.a) v = rng.uniform(-2.0, 2.0);
    const std::vector<std::size_t> target{1, 3, 0, 2};
    Mat d;
    epr_loss(random, target, &d);
    std::vector<double> analytic, numeric;
    for (std::size_t i = 0; i < random.a.size(); ++i) {
        analytic.push_back(d.a[i]);
        numeric.push_back(
            gradcheck::central(&random.a[i], [&] { return epr_loss(random, target); }));
    }
    CHECK(gradcheck::rel_error(analytic, numeric) < 1e-6);
}

TEST_CASE("mlm_loss gradients flow into the head only") {
    const SdpDims dims = small_dims();
    Rng rng(9);
    SdpParams params = SdpParams::init(dims, 77);
    const Mat reps = random_mat(3, dims.h, rng);
    const std::vector<std::size_t> targets{1, 5, 10};

    SdpParams grads = SdpParams::zeros(dims);
    mlm_loss(reps, targets, params, &grads);
    for (double* g : grads.sdp_entries()) CHECK(*g == 0.0);

    std::vector<double> analytic, numeric;
    const std::vector<double*> p_entries = params.mlm_entries();
    const std::vector<double*> g_entries = grads.mlm_entries();
    for (std::size_t i = 0; i < p_entries.size(); ++i) {
        analytic.push_back(*g_entries[i]);
        numeric.push_back(gradcheck::central(
            p_entries[i], [&] { return mlm_loss(reps, targets, params); }));
    }
    CHECK(gradcheck::rel_error(analytic, numeric) < 1e-6);
    CHECK_THROWS_AS(mlm_loss(reps, {0, 1, 99}, params), ContractViolation);
}

TEST_CASE("joint loss balances terms with analytic scalar gradients") {
    JointGrads g;
    const double l = joint_loss(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, &g);
    CHECK(l == doctest::Approx(1.5));
    CHECK(std::abs(g.alpha) < 1e-12);  // -L/a^3 + 1/a vanishes at a=1, L=1
    CHECK(std::abs(g.beta) < 1e-12);
    CHECK(std::abs(g.gamma) < 1e-12);

    double alpha = 0.7, beta = 1.3, gamma = 0.9;
    JointGrads g2;
    joint_loss(0.4, 1.1, 0.2, alpha, beta, gamma, &g2);
    const double na = gradcheck::central(
        &alpha, [&] { return joint_loss(0.4, 1.1, 0.2, alpha, beta, gamma); });
    const double nb = gradcheck::central(
        &beta, [&] { return joint_loss(0.4, 1.1, 0.2, alpha, beta, gamma); });
    const double ng = gradcheck::central(
        &gamma, [&] { return joint_loss(0.4, 1.1, 0.2, alpha, beta, gamma); });
    CHECK(g2.alpha == doctest::Approx(na).epsilon(1e-7));
    CHECK(g2.beta == doctest::Approx(nb).epsilon(1e-7));
    CHECK(g2.gamma == doctest::Approx(ng).epsilon(1e-7));
    CHECK_THROWS_AS(joint_loss(1, 1, 1, 0.0, 1, 1), ContractViolation);
}

TEST_CASE("edge F1 counts predictions against the gold grid") {
    F1Counts empty;
    CHECK(empty.f1() == 1.0);

    PairScores scores;
    scores.edge_logits = Mat(2, 2);
    scores.edge_logits(0, 0) = 1.0;   // tp
    scores.edge_logits(0, 1) = 1.0;   // fp
    scores.edge_logits(1, 0) = -1.0;  // fn
    scores.edge_logits(1, 1) = -1.0;  // tn
    GoldGrid gold;
    gold.n = 2;
    gold.m = 2;
    gold.edge = Mat(2, 2);
    gold.edge(0, 0) = 1.0;
    gold.edge(1, 0) = 1.0;
    F1Counts counts;
    count_edge_f1(scores, gold, &counts);
    CHECK(counts.tp == 1);
    CHECK(counts.fp == 1);
    CHECK(counts.fn == 1);
    CHECK(counts.f1() == doctest::Approx(0.5));
}

TEST_CASE("train_demo runs deterministically on a tiny corpus") {
    const Schema schema = fixtures::student_schema();
    std::map<std::string, Schema> schemas{{schema.schema_id, schema}};
    std::vector<PretrainExample> corpus;
    PretrainExample a;
    a.example_id = "a";
    a.schema_id = schema.schema_id;
    a.question = Question::from_text("show height of the student who is the highest");
    a.sql = parse_sql("SELECT MAX(height) FROM student", schema);
    corpus.push_back(a);
    PretrainExample b;
    b.example_id = "b";
    b.schema_id = schema.schema_id;
    b.question = Question::from_text("show the name where the age is more than 17");
    b.sql = parse_sql("SELECT name FROM student WHERE age > 17", schema);
    corpus.push_back(b);

    const TrainResult r1 = train_demo(corpus, schemas, 40, 0.05, 11);
    const TrainResult r2 = train_demo(corpus, schemas, 40, 0.05, 11);
    REQUIRE(!r1.trace.empty());
    CHECK(r1.trace.size() == r2.trace.size());
    CHECK(r1.final_edge_f1 == r2.final_edge_f1);
    CHECK(r1.trace.back().alpha == r2.trace.back().alpha);
    CHECK(r1.trace.back().joint == r2.trace.back().joint);
    for (const TraceRow& row : r1.trace) {
        CHECK(row.alpha >= 1e-3);
        CHECK(row.beta >= 1e-3);
        CHECK(row.gamma >= 1e-3);
        CHECK(std::isfinite(row.joint));
    }
    CHECK_THROWS_AS(train_demo({}, schemas, 10, 0.05, 1), ContractViolation);
}
