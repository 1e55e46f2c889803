#include "forge/corpus.hpp"

#include "forge/error.hpp"

namespace forge {

namespace {

std::string head_string(const DepHead& head, const Schema& schema) { return head.name(schema); }

DepHead parse_head(const std::string& text, const Schema& schema) {
    if (text == kLimitHead) return DepHead::limit();
    const std::size_t dot = text.find('.');
    if (dot == std::string::npos) throw Error("dependency head '" + text + "' is not table.column");
    ColumnId id;
    if (!schema.find_column(text.substr(0, dot), text.substr(dot + 1), &id))
        throw Error("dependency head '" + text + "' not found in schema '" + schema.schema_id + "'");
    return DepHead::col(id);
}

std::string column_string(ColumnId id, const Schema& schema) { return schema.qualified_name(id); }

ColumnId parse_column(const std::string& text, const Schema& schema) {
    const std::size_t dot = text.find('.');
    if (dot == std::string::npos) throw Error("column ref '" + text + "' is not table.column");
    ColumnId id;
    if (!schema.find_column(text.substr(0, dot), text.substr(dot + 1), &id))
        throw Error("column ref '" + text + "' not found in schema '" + schema.schema_id + "'");
    return id;
}

}  // namespace

nlohmann::ordered_json PretrainExample::to_json(const Schema& schema) const {
    nlohmann::ordered_json doc;
    doc["example_id"] = example_id;
    doc["schema_id"] = schema_id;
    doc["sql"] = render_sql(sql);
    doc["question"] = question.raw;
    doc["provenance"] = provenance;
    if (dependencies) {
        auto& deps = doc["dependencies"] = nlohmann::ordered_json::array();
        for (const DependencyEdge& e : dependencies->edges) {
            nlohmann::ordered_json je;
            je["head"] = head_string(e.head, schema);
            je["span"] = {e.span.begin, e.span.end};
            je["label"] = std::string(dependency_type_name(e.label));
            je["score"] = e.score;
            deps.push_back(std::move(je));
        }
    }
    if (difficulty) doc["difficulty"] = *difficulty;
    if (mask_plan) {
        nlohmann::ordered_json jm;
        jm["masked_question_positions"] = mask_plan->masked_question_positions;
        auto& reps = jm["column_replacements"] = nlohmann::ordered_json::array();
        for (const ColumnReplacement& r : mask_plan->column_replacements) {
            nlohmann::ordered_json jr;
            jr["column"] = column_string(r.column, schema);
            jr["token_index"] = r.token_index;
            jr["replacement"] = r.replacement;
            jr["original"] = r.original;
            reps.push_back(std::move(jr));
        }
        doc["mask_plan"] = std::move(jm);
    }
    if (epr) {
        nlohmann::ordered_json jp;
        jp["shuffled_tokens"] = epr->shuffled_tokens;
        auto& spans = jp["entity_spans"] = nlohmann::ordered_json::array();
        for (const Span& s : epr->entity_spans_original) spans.push_back({s.begin, s.end});
        jp["permutation"] = epr->permutation;
        jp["recovery_target"] = epr->recovery_target;
        doc["epr"] = std::move(jp);
    }
    return doc;
}

PretrainExample PretrainExample::from_json(const nlohmann::json& doc, const Schema& schema) {
    PretrainExample ex;
    try {
        ex.example_id = doc.at("example_id").get<std::string>();
        ex.schema_id = doc.at("schema_id").get<std::string>();
        ex.question = Question::from_text(doc.at("question").get<std::string>());
        ex.sql = parse_sql(doc.at("sql").get<std::string>(), schema);
        if (doc.contains("provenance")) ex.provenance = doc.at("provenance").get<std::string>();
        if (doc.contains("dependencies")) {
            DependencyGraph g;
            for (const auto& je : doc.at("dependencies")) {
                DependencyEdge e;
                e.head = parse_head(je.at("head").get<std::string>(), schema);
                e.span = {je.at("span").at(0).get<std::size_t>(),
                          je.at("span").at(1).get<std::size_t>()};
                e.label = dependency_type_from_name(je.at("label").get<std::string>());
                e.score = je.at("score").get<double>();
                g.edges.push_back(std::move(e));
            }
            ex.dependencies = std::move(g);
        }
        if (doc.contains("difficulty")) ex.difficulty = doc.at("difficulty").get<double>();
        if (doc.contains("mask_plan")) {
            const auto& jm = doc.at("mask_plan");
            MaskPlan plan;
            for (const auto& p : jm.at("masked_question_positions"))
                plan.masked_question_positions.push_back(p.get<std::size_t>());
            for (const auto& jr : jm.at("column_replacements")) {
                ColumnReplacement r;
                r.column = parse_column(jr.at("column").get<std::string>(), schema);
                r.token_index = jr.at("token_index").get<std::size_t>();
                r.replacement = jr.at("replacement").get<std::string>();
                r.original = jr.at("original").get<std::string>();
                plan.column_replacements.push_back(std::move(r));
            }
            ex.mask_plan = std::move(plan);
        }
        if (doc.contains("epr")) {
            const auto& jp = doc.at("epr");
            PerturbedExample pe;
            for (const auto& t : jp.at("shuffled_tokens"))
                pe.shuffled_tokens.push_back(t.get<std::string>());
            for (const auto& js : jp.at("entity_spans"))
                pe.entity_spans_original.push_back(
                    {js.at(0).get<std::size_t>(), js.at(1).get<std::size_t>()});
            for (const auto& v : jp.at("permutation")) pe.permutation.push_back(v.get<std::size_t>());
            for (const auto& v : jp.at("recovery_target"))
                pe.recovery_target.push_back(v.get<std::size_t>());
            ex.epr = std::move(pe);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed corpus record: ") + e.what());
    }
    return ex;
}

}  // namespace forge
