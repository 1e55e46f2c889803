// Python veneer over the forge core. Structured values cross the boundary
// as JSON strings so the package stays dependency-free on the Python side.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/curriculum.hpp"
#include "forge/deps.hpp"
#include "forge/objectives.hpp"
#include "forge/rng.hpp"
#include "forge/sdp.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace py = pybind11;
using namespace forge;

namespace {

Schema schema_from_json_text(const std::string& schema_json) {
    return Schema::from_json(nlohmann::json::parse(schema_json));
}

std::string canonical_sql(const std::string& sql, const std::string& schema_json) {
    const Schema schema = schema_from_json_text(schema_json);
    return render_sql(parse_sql(sql, schema));
}

std::vector<std::string> sample_sql_strings(const std::string& schema_json, std::size_t count,
                                            std::uint64_t seed) {
    const Schema schema = schema_from_json_text(schema_json);
    GrammarConfig config;
    config.seed = seed;
    SqlSampler sampler(schema, config);
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(render_sql(sampler.next()));
    return out;
}

std::string question_for(const std::string& sql, const std::string& schema_json) {
    const Schema schema = schema_from_json_text(schema_json);
    return synthesize_question(parse_sql(sql, schema), schema);
}

std::string label_pair(const std::string& question, const std::string& sql,
                       const std::string& schema_json, double tau) {
    const Schema schema = schema_from_json_text(schema_json);
    PretrainExample ex;
    ex.example_id = "py-0";
    ex.schema_id = schema.schema_id;
    ex.question = Question::from_text(question);
    ex.sql = parse_sql(sql, schema);
    ex.provenance = "ingested";
    ex.dependencies = derive_dependencies(ex.question, ex.sql, schema, tau);
    return ex.to_json(schema).dump();
}

std::optional<std::tuple<std::size_t, std::size_t, double>> match_phrase(
    const std::string& question, const std::string& phrase, double tau) {
    const auto hit = ngram_match(Question::from_text(question), phrase, tau);
    if (!hit) return std::nullopt;
    return std::make_tuple(hit->span.begin, hit->span.end, 1.0 - hit->distance);
}

std::tuple<double, double, double, double> joint_loss_with_grads(double l_mlm, double l_sdp,
                                                                 double l_epr, double alpha,
                                                                 double beta, double gamma) {
    JointGrads grads;
    const double loss = joint_loss(l_mlm, l_sdp, l_epr, alpha, beta, gamma, &grads);
    return {loss, grads.alpha, grads.beta, grads.gamma};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "sdforge core: SQL corpus forging and objective verification";

    m.def("tokenize",
          [](const std::string& text) { return tokenize(text); },
          py::arg("text"), "Lowercased word/number/punctuation tokens.");
    m.def("normalize_phrase",
          [](const std::string& text) { return normalize_phrase(text); },
          py::arg("text"), "Space-joined lowercase token form used for fuzzy matching.");

    m.def("canonical_sql", &canonical_sql, py::arg("sql"), py::arg("schema_json"),
          "Parse against the schema and re-render in canonical form.");
    m.def("sample_sql", &sample_sql_strings, py::arg("schema_json"), py::arg("count"),
          py::arg("seed"),
          "Deterministically sample `count` SQL strings from the grammar.");
    m.def("question_for", &question_for, py::arg("sql"), py::arg("schema_json"),
          "Template natural-language question for a SQL string.");

    m.def("label_pair", &label_pair, py::arg("question"), py::arg("sql"),
          py::arg("schema_json"), py::arg("tau") = kDefaultTau,
          "Label a question/SQL pair; returns the full record as a JSON string.");
    m.def("ngram_match", &match_phrase, py::arg("question"), py::arg("phrase"),
          py::arg("tau") = kDefaultTau,
          "Best fuzzy window as (begin, end, confidence), or None below threshold.");

    m.def("competence", &competence, py::arg("t"), py::arg("total_steps"),
          py::arg("min_difficulty"),
          "Square-root curriculum competence c(t) in [min_difficulty, 1].");

    m.def("joint_loss",
          [](double l_mlm, double l_sdp, double l_epr, double alpha, double beta, double gamma) {
              return joint_loss(l_mlm, l_sdp, l_epr, alpha, beta, gamma);
          },
          py::arg("l_mlm"), py::arg("l_sdp"), py::arg("l_epr"), py::arg("alpha"),
          py::arg("beta"), py::arg("gamma"),
          "Uncertainty-weighted combination of the three objective losses.");
    m.def("joint_loss_with_grads", &joint_loss_with_grads, py::arg("l_mlm"), py::arg("l_sdp"),
          py::arg("l_epr"), py::arg("alpha"), py::arg("beta"), py::arg("gamma"),
          "Returns (loss, d_alpha, d_beta, d_gamma).");

    m.def("splitmix64", &splitmix64, py::arg("x"));
    m.def("derive_seed",
          [](std::uint64_t base, const std::string& tag) { return derive_seed(base, tag); },
          py::arg("base"), py::arg("tag"),
          "Stable child seed for a named stream.");

    std::vector<std::string> names;
    for (std::size_t i = 0; i < kDependencyTypeCount; ++i)
        names.emplace_back(dependency_type_name(static_cast<DependencyType>(i)));
    m.attr("DEPENDENCY_TYPES") = names;
    m.attr("DEFAULT_TAU") = kDefaultTau;
}
