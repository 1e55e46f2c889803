#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forge/curriculum.hpp"
#include "forge/deps.hpp"
#include "forge/error.hpp"
#include "forge/objectives.hpp"
#include "forge/pipeline.hpp"
#include "forge/rng.hpp"
#include "forge/sdp.hpp"

namespace {

using forge::Error;

std::vector<std::string> split_csv(const std::string& raw) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= raw.size()) {
        const std::size_t comma = raw.find(',', start);
        const std::size_t end = comma == std::string::npos ? raw.size() : comma;
        if (end > start) out.push_back(raw.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

struct LoadedCorpus {
    std::vector<forge::PretrainExample> examples;
    std::vector<forge::RejectRecord> rejects;
};

// Reads corpus JSONL, resolving each record against the schema set. Bad
// records become rejects instead of aborting the run.
LoadedCorpus load_corpus(const std::string& path,
                         const std::map<std::string, forge::Schema>& schemas,
                         const std::string& default_provenance) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file '" + path + "'");
    LoadedCorpus out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::ordered_json doc;
        auto reject = [&](const std::string& reason) {
            forge::RejectRecord r;
            r.original = doc.is_null() ? nlohmann::ordered_json(line) : doc;
            r.reason = "line " + std::to_string(line_no) + ": " + reason;
            out.rejects.push_back(std::move(r));
        };
        try {
            doc = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            doc = nullptr;
            reject(std::string("invalid json: ") + e.what());
            continue;
        }
        if (!doc.contains("schema_id") || !doc.at("schema_id").is_string()) {
            reject("missing or non-string field \"schema_id\"");
            continue;
        }
        const std::string schema_id = doc.at("schema_id").get<std::string>();
        const auto it = schemas.find(schema_id);
        if (it == schemas.end()) {
            reject("unknown schema_id '" + schema_id + "'");
            continue;
        }
        try {
            forge::PretrainExample ex = forge::PretrainExample::from_json(doc, it->second);
            if (!doc.contains("provenance")) ex.provenance = default_provenance;
            if (ex.question.tokens.empty()) {
                reject("empty question");
                continue;
            }
            if (!seen.insert(ex.example_id).second) {
                reject("duplicate example_id '" + ex.example_id + "'");
                continue;
            }
            out.examples.push_back(std::move(ex));
        } catch (const Error& e) {
            reject(e.what());
        }
    }
    return out;
}

void write_rejects(const std::string& path, const std::vector<forge::RejectRecord>& rejects) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    for (const forge::RejectRecord& r : rejects) {
        nlohmann::ordered_json doc;
        doc["record"] = r.original;
        doc["reason"] = r.reason;
        out << doc.dump() << "\n";
    }
}

void write_corpus(const std::string& path, const std::vector<forge::PretrainExample>& examples,
                  const std::map<std::string, forge::Schema>& schemas) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    for (const forge::PretrainExample& ex : examples)
        out << ex.to_json(schemas.at(ex.schema_id)).dump() << "\n";
}

void warn_rejects(const std::vector<forge::RejectRecord>& rejects) {
    for (const forge::RejectRecord& r : rejects)
        std::fprintf(stderr, "warning: skipped record (%s)\n", r.reason.c_str());
}

int cmd_sample(const std::string& schemas_path, std::size_t count, std::uint64_t seed,
               std::size_t max_joins, const std::string& clauses_csv, const std::string& out_path) {
    const std::map<std::string, forge::Schema> schemas = forge::ingest_schemas(schemas_path);
    forge::GrammarConfig base;
    base.max_joins = max_joins;
    if (!clauses_csv.empty()) {
        base.clauses.clear();
        for (const std::string& name : split_csv(clauses_csv))
            base.clauses.insert(forge::clause_from_name(name));
    }
    base.validate();
    std::vector<std::string> ids;
    for (const auto& [id, schema] : schemas) ids.push_back(id);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + out_path + "'");
    std::map<std::string, std::unique_ptr<forge::SqlSampler>> samplers;
    for (std::size_t i = 0; i < count; ++i) {
        const std::string& schema_id = ids[i % ids.size()];
        const forge::Schema& schema = schemas.at(schema_id);
        auto it = samplers.find(schema_id);
        if (it == samplers.end()) {
            forge::GrammarConfig g = base;
            g.seed = forge::derive_seed(seed, "sample:" + schema_id);
            it = samplers.emplace(schema_id, std::make_unique<forge::SqlSampler>(schema, g)).first;
        }
        forge::PretrainExample ex;
        ex.example_id = "sample-" + [&] {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%06zu", i);
            return std::string(buf);
        }();
        ex.schema_id = schema_id;
        ex.sql = it->second->next();
        ex.question = forge::Question::from_text(forge::synthesize_question(ex.sql, schema));
        out << ex.to_json(schema).dump() << "\n";
    }
    return 0;
}

int cmd_label(const std::string& pairs_path, const std::string& schemas_path, double tau,
              const std::string& out_path) {
    const std::map<std::string, forge::Schema> schemas = forge::ingest_schemas(schemas_path);
    LoadedCorpus corpus = load_corpus(pairs_path, schemas, "ingested");
    for (forge::PretrainExample& ex : corpus.examples) {
        ex.dependencies =
            forge::derive_dependencies(ex.question, ex.sql, schemas.at(ex.schema_id), tau);
    }
    write_corpus(out_path, corpus.examples, schemas);
    write_rejects(out_path + ".rejects.jsonl", corpus.rejects);
    return corpus.rejects.empty() ? 0 : 2;
}

int cmd_objectives(const std::string& corpus_path, const std::string& schemas_path,
                   double mlm_ratio, double value_prob, std::uint64_t seed,
                   const std::string& out_path) {
    const std::map<std::string, forge::Schema> schemas = forge::ingest_schemas(schemas_path);
    LoadedCorpus corpus = load_corpus(corpus_path, schemas, "ingested");
    for (forge::PretrainExample& ex : corpus.examples) {
        forge::MaskPlan plan =
            forge::plan_mlm(ex, mlm_ratio, forge::derive_seed(seed, ex.example_id + ":mlm"));
        forge::MaskPlan vals =
            forge::plan_value_replacement(ex, schemas.at(ex.schema_id), value_prob,
                                          forge::derive_seed(seed, ex.example_id + ":vals"));
        plan.column_replacements = std::move(vals.column_replacements);
        ex.mask_plan = std::move(plan);
        if (ex.dependencies)
            ex.epr = forge::perturb_entities(ex, forge::derive_seed(seed, ex.example_id + ":epr"));
    }
    write_corpus(out_path, corpus.examples, schemas);
    write_rejects(out_path + ".rejects.jsonl", corpus.rejects);
    return corpus.rejects.empty() ? 0 : 2;
}

int cmd_curriculum(const std::string& corpus_path, const std::string& schemas_path,
                   std::size_t steps, std::size_t batch_size, std::uint64_t seed,
                   const std::string& trace_path) {
    const std::map<std::string, forge::Schema> schemas = forge::ingest_schemas(schemas_path);
    LoadedCorpus corpus = load_corpus(corpus_path, schemas, "ingested");
    warn_rejects(corpus.rejects);
    if (corpus.examples.empty()) throw Error("corpus '" + corpus_path + "' has no usable records");
    forge::write_curriculum_trace(corpus.examples, schemas, steps, batch_size, seed, trace_path);
    return corpus.rejects.empty() ? 0 : 2;
}

int cmd_train_demo(const std::string& corpus_path, const std::string& schemas_path,
                   std::size_t steps, double lr, std::uint64_t seed,
                   const std::string& trace_path) {
    const std::map<std::string, forge::Schema> schemas = forge::ingest_schemas(schemas_path);
    LoadedCorpus corpus = load_corpus(corpus_path, schemas, "ingested");
    warn_rejects(corpus.rejects);
    if (corpus.examples.empty()) throw Error("corpus '" + corpus_path + "' has no usable records");
    const forge::TrainResult result = forge::train_demo(corpus.examples, schemas, steps, lr, seed);
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + trace_path + "'");
    out << "step,l_mlm,l_sdp,l_epr,joint,alpha,beta,gamma,edge_f1\n";
    for (const forge::TraceRow& row : result.trace) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      row.step, row.l_mlm, row.l_sdp, row.l_epr, row.joint, row.alpha, row.beta,
                      row.gamma, row.edge_f1);
        out << buf;
    }
    std::printf("final_edge_f1=%.17g after %zu steps\n", result.final_edge_f1,
                result.trace.empty() ? std::size_t{0} : result.trace.back().step);
    return corpus.rejects.empty() ? 0 : 2;
}

int cmd_stats(const std::string& corpus_path, const std::string& schemas_path, double tau) {
    const std::map<std::string, forge::Schema> schemas = forge::ingest_schemas(schemas_path);
    LoadedCorpus corpus = load_corpus(corpus_path, schemas, "ingested");
    warn_rejects(corpus.rejects);
    forge::CorpusStats stats = forge::report_stats(corpus.examples, schemas, tau);
    stats.rejected_count = corpus.rejects.size();
    std::cout << stats.to_json().dump(2) << "\n";
    return corpus.rejects.empty() ? 0 : 2;
}

int cmd_run(const std::string& config_path) {
    const forge::PipelineConfig config = forge::PipelineConfig::from_file(config_path);
    const forge::CorpusStats stats = forge::run_pipeline(config);
    std::cout << stats.to_json().dump(2) << "\n";
    return stats.rejected_count == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdforge: SQL corpus forging, schema-dependency labeling and "
                 "pretraining-objective toolkit"};
    app.require_subcommand(1);

    std::string schemas_path, out_path, pairs_path, corpus_path, clauses_csv, trace_path,
        config_path;
    std::size_t count = 0, max_joins = 2, steps = 0, batch_size = 8;
    std::uint64_t seed = 0;
    double tau = forge::kDefaultTau, mlm_ratio = 0.25, value_prob = 0.25, lr = 0.05;

    CLI::App* sample = app.add_subcommand("sample", "Sample SQL/question pairs from schemas");
    sample->add_option("--schemas", schemas_path, "Schema JSON file or directory")->required();
    sample->add_option("--count", count, "Number of samples")->required();
    sample->add_option("--seed", seed, "Random seed")->required();
    sample->add_option("--max-joins", max_joins, "Maximum joins per query");
    sample->add_option("--clauses", clauses_csv, "Comma-separated clause families to enable");
    sample->add_option("--out", out_path, "Output JSONL path")->required();

    CLI::App* label = app.add_subcommand("label", "Derive schema dependencies for question/SQL pairs");
    label->add_option("--pairs", pairs_path, "Input pairs JSONL")->required();
    label->add_option("--schemas", schemas_path, "Schema JSON file or directory")->required();
    label->add_option("--tau", tau, "Fuzzy-match distance threshold");
    label->add_option("--out", out_path, "Output JSONL path")->required();

    CLI::App* objectives = app.add_subcommand("objectives", "Plan MLM masking and entity perturbation");
    objectives->add_option("--corpus", corpus_path, "Input corpus JSONL")->required();
    objectives->add_option("--schemas", schemas_path, "Schema JSON file or directory")->required();
    objectives->add_option("--mlm-ratio", mlm_ratio, "Question-token mask probability");
    objectives->add_option("--value-prob", value_prob, "Column-token replacement probability");
    objectives->add_option("--seed", seed, "Random seed")->required();
    objectives->add_option("--out", out_path, "Output JSONL path")->required();

    CLI::App* curriculum = app.add_subcommand("curriculum", "Audit curriculum batches over a corpus");
    curriculum->add_option("--corpus", corpus_path, "Input corpus JSONL")->required();
    curriculum->add_option("--schemas", schemas_path, "Schema JSON file or directory")->required();
    curriculum->add_option("--steps", steps, "Total training steps T")->required();
    curriculum->add_option("--batch-size", batch_size, "Batch size");
    curriculum->add_option("--seed", seed, "Random seed")->required();
    curriculum->add_option("--trace", trace_path, "Output CSV path")->required();

    CLI::App* train = app.add_subcommand("train-demo", "Fit the desk-scale scorer on a tiny corpus");
    train->add_option("--corpus", corpus_path, "Input corpus JSONL")->required();
    train->add_option("--schemas", schemas_path, "Schema JSON file or directory")->required();
    train->add_option("--steps", steps, "Training steps")->required();
    train->add_option("--lr", lr, "Learning rate");
    train->add_option("--seed", seed, "Random seed")->required();
    train->add_option("--trace", trace_path, "Output CSV path")->required();

    CLI::App* stats = app.add_subcommand("stats", "Report corpus statistics");
    stats->add_option("--corpus", corpus_path, "Input corpus JSONL")->required();
    stats->add_option("--schemas", schemas_path, "Schema JSON file or directory")->required();
    stats->add_option("--tau", tau, "Fuzzy-match distance threshold");

    CLI::App* run = app.add_subcommand("run", "Run the full pipeline from a config file");
    run->add_option("--config", config_path, "Pipeline config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sample->parsed())
            return cmd_sample(schemas_path, count, seed, max_joins, clauses_csv, out_path);
        if (label->parsed()) return cmd_label(pairs_path, schemas_path, tau, out_path);
        if (objectives->parsed())
            return cmd_objectives(corpus_path, schemas_path, mlm_ratio, value_prob, seed, out_path);
        if (curriculum->parsed())
            return cmd_curriculum(corpus_path, schemas_path, steps, batch_size, seed, trace_path);
        if (train->parsed())
            return cmd_train_demo(corpus_path, schemas_path, steps, lr, seed, trace_path);
        if (stats->parsed()) return cmd_stats(corpus_path, schemas_path, tau);
        if (run->parsed()) return cmd_run(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
