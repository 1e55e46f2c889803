#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "forge/curriculum.hpp"
#include "forge/error.hpp"
#include "forge/rng.hpp"

using namespace forge;

namespace {

PretrainExample example_with_question(const std::string& id, const std::string& text) {
    PretrainExample ex;
    ex.example_id = id;
    ex.schema_id = "student";
    ex.question = Question::from_text(text);
    return ex;
}

}  // namespace

TEST_CASE("input_length counts question and column-name tokens") {
    const Schema schema = fixtures::student_schema();
    std::map<std::string, Schema> schemas{{"student", schema}};
    const PretrainExample ex = example_with_question("e0", "show all heights");
    // 3 question tokens + 4 single-token column names
    CHECK(input_length(ex, schema) == 7);
}

TEST_CASE("difficulties are min-max scaled input lengths") {
    std::map<std::string, Schema> schemas{{"student", fixtures::student_schema()}};
    std::vector<PretrainExample> corpus;
    corpus.push_back(example_with_question("a", "one two"));                  // 6
    corpus.push_back(example_with_question("b", "one two three four"));      // 8
    corpus.push_back(example_with_question("c", "one two three four five six"));  // 10
    const std::vector<double> d = compute_difficulties(corpus, schemas);
    REQUIRE(d.size() == 3);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == doctest::Approx(0.5));
    CHECK(d[2] == 1.0);

    std::vector<PretrainExample> flat(3, example_with_question("x", "same length text"));
    const std::vector<double> dz = compute_difficulties(flat, schemas);
    CHECK(dz == std::vector<double>{0.0, 0.0, 0.0});

    CHECK_THROWS_AS(compute_difficulties({}, schemas), ContractViolation);
}

TEST_CASE("competence hits its endpoints exactly") {
    CHECK(competence(0, 100, 0.25) == 0.25);
    CHECK(competence(100, 100, 0.25) == 1.0);
    CHECK(competence(0, 1, 0.0) == 0.0);
    CHECK(competence(1, 1, 0.9) == 1.0);
}

TEST_CASE("competence midpoint matches direct evaluation") {
    // t (1 - min_d^2) / T + min_d^2 = 0.52 for t=1, T=2, min_d=0.2.
    CHECK(competence(1, 2, 0.2) == doctest::Approx(std::sqrt(0.52)).epsilon(1e-14));
}

TEST_CASE("competence is monotone in t") {
    const double min_d = 0.3;
    double prev = competence(0, 50, min_d);
    for (std::size_t t = 1; t <= 50; ++t) {
        const double c = competence(t, 50, min_d);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS(competence(5, 4, 0.1), ContractViolation);
    CHECK_THROWS_AS(competence(0, 0, 0.1), ContractViolation);
    CHECK_THROWS_AS(competence(0, 10, 1.5), ContractViolation);
}

TEST_CASE("sample_batch draws admissible examples and pads with the easiest") {
    CurriculumState state = CurriculumState::make({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, 10);

    state.t = 0;  // competence = min_d = 0.0; only index 0 admissible
    const std::vector<std::size_t> batch = sample_batch(state, 3, 42);
    REQUIRE(batch.size() == 3);
    CHECK(batch[0] == 0);  // the whole pool
    CHECK(batch[1] == 1);  // then ascending difficulty padding
    CHECK(batch[2] == 2);

    state.t = 10;  // competence = 1.0; everything admissible
    const std::vector<std::size_t> full = sample_batch(state, 4, 42);
    REQUIRE(full.size() == 4);
    std::set<std::size_t> unique(full.begin(), full.end());
    CHECK(unique.size() == 4);
    CHECK(sample_batch(state, 4, 42) == full);         // deterministic
    bool differs = false;
    for (std::uint64_t s = 0; s < 20 && !differs; ++s)
        differs = sample_batch(state, 4, s) != full;
    CHECK(differs);

    state.t = 5;  // competence in between: batch only from the admissible pool
    const double c = competence(5, 10, 0.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
        for (std::size_t idx : sample_batch(state, 2, s)) {
            CHECK(state.difficulties[idx] <= c);
        }
    }
}
