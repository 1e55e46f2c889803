#include "forge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

#include "forge/curriculum.hpp"
#include "forge/error.hpp"
#include "forge/objectives.hpp"
#include "forge/rng.hpp"

namespace forge {

namespace fs = std::filesystem;

namespace {

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("FORGE_LOG");
        if (!env) return 0;
        const std::string v = to_lower(env);
        if (v == "debug" || v == "2") return 2;
        if (v == "info" || v == "1") return 1;
        return 0;
    }();
    return level;
}

Agg agg_from_config_name(const std::string& raw) {
    const std::string v = to_lower(raw);
    if (v == "max") return Agg::Max;
    if (v == "min") return Agg::Min;
    if (v == "count") return Agg::Count;
    if (v == "avg") return Agg::Avg;
    if (v == "sum") return Agg::Sum;
    throw Error("config: unknown aggregation '" + raw + "'");
}

GrammarConfig grammar_from_json(const nlohmann::json& doc) {
    GrammarConfig g;
    auto take_size = [&doc](const char* key, std::size_t* out) {
        if (doc.contains(key)) *out = doc.at(key).get<std::size_t>();
    };
    auto take_prob = [&doc](const char* key, double* out) {
        if (doc.contains(key)) *out = doc.at(key).get<double>();
    };
    take_size("max_select_items", &g.max_select_items);
    take_size("max_conditions", &g.max_conditions);
    take_size("max_joins", &g.max_joins);
    take_prob("subquery_probability", &g.subquery_probability);
    take_prob("where_probability", &g.where_probability);
    take_prob("group_by_probability", &g.group_by_probability);
    take_prob("having_probability", &g.having_probability);
    take_prob("order_by_probability", &g.order_by_probability);
    take_prob("limit_probability", &g.limit_probability);
    take_prob("join_probability", &g.join_probability);
    take_prob("agg_probability", &g.agg_probability);
    take_prob("group_agg_probability", &g.group_agg_probability);
    take_prob("star_probability", &g.star_probability);
    if (doc.contains("clauses")) {
        g.clauses.clear();
        for (const auto& name : doc.at("clauses"))
            g.clauses.insert(clause_from_name(name.get<std::string>()));
    }
    if (doc.contains("allowed_aggs")) {
        g.allowed_aggs.clear();
        for (const auto& name : doc.at("allowed_aggs"))
            g.allowed_aggs.insert(agg_from_config_name(name.get<std::string>()));
    }
    return g;
}

std::string zero_pad(std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, value);
    return buf;
}

std::string sanitize_filename(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-' || c == '+';
        if (!ok) c = '_';
    }
    return out;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
}

}  // namespace

void write_curriculum_trace(const std::vector<PretrainExample>& corpus,
                            const std::map<std::string, Schema>& schemas, std::size_t steps,
                            std::size_t batch_size, std::uint64_t seed, const std::string& path) {
    const std::vector<double> diffs = compute_difficulties(corpus, schemas);
    CurriculumState state = CurriculumState::make(diffs, steps);
    std::ofstream out = open_output(path);
    out << "t,competence,pool_size,sampled_ids\n";
    for (std::size_t t = 1; t <= steps; ++t) {
        state.t = t;
        const double c = competence(t, steps, state.min_d);
        const std::size_t pool = static_cast<std::size_t>(
            std::count_if(diffs.begin(), diffs.end(), [c](double d) { return d <= c; }));
        const std::vector<std::size_t> batch =
            sample_batch(state, batch_size, derive_seed(seed, t));
        char buf[80];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,", t, c, pool);
        out << buf;
        for (std::size_t j = 0; j < batch.size(); ++j)
            out << (j ? " " : "") << corpus[batch[j]].example_id;
        out << "\n";
    }
}

bool log_enabled(int level) { return log_level() >= level; }

void log_info(const std::string& msg) {
    if (log_enabled(1)) std::fprintf(stderr, "[forge] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_enabled(2)) std::fprintf(stderr, "[forge:debug] %s\n", msg.c_str());
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
    PipelineConfig c;
    try {
        if (!doc.contains("seed")) throw Error("config: \"seed\" is required");
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.schemas_path = doc.at("schemas").get<std::string>();
        c.out_dir = doc.at("out_dir").get<std::string>();
        if (doc.contains("pairs")) c.pairs_path = doc.at("pairs").get<std::string>();
        if (doc.contains("sample_count")) c.sample_count = doc.at("sample_count").get<std::size_t>();
        if (doc.contains("grammar")) c.grammar = grammar_from_json(doc.at("grammar"));
        if (doc.contains("tau")) c.tau = doc.at("tau").get<double>();
        if (doc.contains("mlm_ratio")) c.mlm_ratio = doc.at("mlm_ratio").get<double>();
        if (doc.contains("value_prob")) c.value_prob = doc.at("value_prob").get<double>();
        if (doc.contains("curriculum_steps"))
            c.curriculum_steps = doc.at("curriculum_steps").get<std::size_t>();
        if (doc.contains("batch_size")) c.batch_size = doc.at("batch_size").get<std::size_t>();
        if (doc.contains("stages")) {
            const auto& s = doc.at("stages");
            if (s.contains("label")) c.stages.label = s.at("label").get<bool>();
            if (s.contains("difficulty")) c.stages.difficulty = s.at("difficulty").get<bool>();
            if (s.contains("objectives")) c.stages.objectives = s.at("objectives").get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error("config file '" + path + "': " + e.what());
    }
    return from_json(doc);
}

void PipelineConfig::validate() const {
    if (schemas_path.empty()) throw Error("config: \"schemas\" is required");
    if (out_dir.empty()) throw Error("config: \"out_dir\" is required");
    if (!fs::exists(schemas_path))
        throw Error("config: schema path '" + schemas_path + "' does not exist");
    if (!pairs_path.empty() && !fs::exists(pairs_path))
        throw Error("config: pairs file '" + pairs_path + "' does not exist");
    if (sample_count == 0 && pairs_path.empty())
        throw Error("config: nothing to do (sample_count is 0 and no pairs file)");
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error("config: tau outside [0,1]");
    if (!(mlm_ratio >= 0.0 && mlm_ratio <= 1.0)) throw Error("config: mlm_ratio outside [0,1]");
    if (!(value_prob >= 0.0 && value_prob <= 1.0)) throw Error("config: value_prob outside [0,1]");
    if (batch_size == 0) throw Error("config: batch_size must be positive");
    grammar.validate();
}

std::map<std::string, Schema> ingest_schemas(const std::string& path) {
    if (!fs::exists(path)) throw Error("schema path '" + path + "' does not exist");
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw Error("schema directory '" + path + "' has no .json files");
    } else {
        files.push_back(path);
    }
    std::map<std::string, Schema> out;
    std::map<std::string, std::string> sources;
    for (const std::string& file : files) {
        std::ifstream in(file);
        if (!in) throw Error("cannot open schema file '" + file + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw Error("schema file '" + file + "': " + e.what());
        }
        std::vector<nlohmann::json> entries;
        if (doc.is_array())
            entries.assign(doc.begin(), doc.end());
        else
            entries.push_back(std::move(doc));
        for (const nlohmann::json& entry : entries) {
            Schema schema;
            try {
                schema = Schema::from_json(entry);
            } catch (const Error& e) {
                throw Error("schema file '" + file + "': " + e.what());
            }
            const auto [it, inserted] = sources.emplace(schema.schema_id, file);
            if (!inserted) {
                throw Error("duplicate schema_id '" + schema.schema_id + "' in '" + file +
                            "' and '" + it->second + "'");
            }
            out.emplace(schema.schema_id, std::move(schema));
        }
    }
    log_info("loaded " + std::to_string(out.size()) + " schemas from '" + path + "'");
    return out;
}

IngestResult ingest_pairs(const std::string& path, const std::map<std::string, Schema>& schemas) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pairs file '" + path + "'");
    IngestResult out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::ordered_json doc;
        auto reject = [&](const std::string& reason) {
            RejectRecord r;
            r.original = doc.is_null() ? nlohmann::ordered_json(line) : doc;
            r.reason = "line " + std::to_string(line_no) + ": " + reason;
            log_debug("rejected " + r.reason);
            out.rejects.push_back(std::move(r));
        };
        try {
            doc = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            doc = nullptr;
            reject(std::string("invalid json: ") + e.what());
            continue;
        }
        bool fields_ok = true;
        for (const char* field : {"example_id", "schema_id", "question", "sql"}) {
            if (!doc.contains(field) || !doc.at(field).is_string()) {
                reject(std::string("missing or non-string field \"") + field + "\"");
                fields_ok = false;
                break;
            }
        }
        if (!fields_ok) continue;
        const std::string example_id = doc.at("example_id").get<std::string>();
        if (!seen.insert(example_id).second) {
            reject("duplicate example_id '" + example_id + "'");
            continue;
        }
        const std::string schema_id = doc.at("schema_id").get<std::string>();
        const auto schema_it = schemas.find(schema_id);
        if (schema_it == schemas.end()) {
            reject("unknown schema_id '" + schema_id + "'");
            continue;
        }
        PretrainExample ex;
        ex.example_id = example_id;
        ex.schema_id = schema_id;
        ex.question = Question::from_text(doc.at("question").get<std::string>());
        if (ex.question.tokens.empty()) {
            reject("empty question");
            continue;
        }
        try {
            ex.sql = parse_sql(doc.at("sql").get<std::string>(), schema_it->second);
        } catch (const Error& e) {
            reject(e.what());
            continue;
        }
        ex.provenance = "ingested";
        out.accepted.push_back(std::move(ex));
    }
    log_info("ingested " + std::to_string(out.accepted.size()) + " pairs, rejected " +
             std::to_string(out.rejects.size()));
    return out;
}

nlohmann::ordered_json CorpusStats::to_json() const {
    nlohmann::ordered_json doc;
    doc["example_count"] = example_count;
    doc["rejected_count"] = rejected_count;
    auto& hist = doc["dependency_histogram"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < kDependencyTypeCount; ++i)
        hist[std::string(dependency_type_name(static_cast<DependencyType>(i)))] =
            dependency_histogram[i];
    doc["difficulty"] = {{"min", difficulty_min},
                         {"median", difficulty_median},
                         {"max", difficulty_max}};
    auto& cov = doc["clause_coverage"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < clause_coverage.size(); ++i)
        cov[std::string(clause_name(static_cast<Clause>(i)))] = clause_coverage[i];
    doc["unmatched_mention_rate"] = unmatched_mention_rate;
    return doc;
}

CorpusStats report_stats(const std::vector<PretrainExample>& corpus,
                         const std::map<std::string, Schema>& schemas, double tau) {
    CorpusStats st;
    st.example_count = corpus.size();
    std::vector<double> diffs;
    std::size_t targets = 0, matched = 0;
    for (const PretrainExample& ex : corpus) {
        for (std::size_t c = 0; c < st.clause_coverage.size(); ++c) {
            if (ex.sql.has_clause(static_cast<Clause>(c))) ++st.clause_coverage[c];
        }
        if (ex.difficulty) diffs.push_back(*ex.difficulty);
        if (!ex.dependencies) continue;
        for (const DependencyEdge& e : ex.dependencies->edges)
            ++st.dependency_histogram[static_cast<std::size_t>(e.label)];
        const auto it = schemas.find(ex.schema_id);
        if (it == schemas.end())
            throw Error("stats: unknown schema_id '" + ex.schema_id + "' in example '" +
                        ex.example_id + "'");
        LabelStats ls;
        derive_dependencies(ex.question, ex.sql, it->second, tau, TriggerLexicon::builtin(), &ls);
        targets += ls.targets;
        matched += ls.matched;
    }
    if (diffs.empty() && !corpus.empty()) diffs = compute_difficulties(corpus, schemas);
    if (!diffs.empty()) {
        std::sort(diffs.begin(), diffs.end());
        st.difficulty_min = diffs.front();
        st.difficulty_max = diffs.back();
        const std::size_t mid = diffs.size() / 2;
        st.difficulty_median =
            diffs.size() % 2 ? diffs[mid] : 0.5 * (diffs[mid - 1] + diffs[mid]);
    }
    if (targets > 0)
        st.unmatched_mention_rate =
            1.0 - static_cast<double>(matched) / static_cast<double>(targets);
    return st;
}

CorpusStats run_pipeline(const PipelineConfig& config) {
    config.validate();
    std::map<std::string, Schema> schemas = ingest_schemas(config.schemas_path);

    std::vector<Schema> singles;
    for (const auto& [id, schema] : schemas) {
        if (schema.tables.size() == 1) singles.push_back(schema);
    }
    if (singles.size() >= 2) {
        for (Schema& merged : compose_multitable(singles)) {
            if (merged.tables.size() < 2) continue;
            const std::string id = merged.schema_id;
            if (!schemas.emplace(id, std::move(merged)).second)
                throw Error("composed schema_id '" + id + "' collides with an input schema");
            log_info("composed multi-table schema '" + id + "'");
        }
    }

    std::vector<PretrainExample> corpus;
    std::vector<RejectRecord> rejects;

    if (config.sample_count > 0) {
        std::vector<std::string> ids;
        ids.reserve(schemas.size());
        for (const auto& [id, schema] : schemas) ids.push_back(id);
        std::map<std::string, std::unique_ptr<SqlSampler>> samplers;
        for (std::size_t i = 0; i < config.sample_count; ++i) {
            const std::string& schema_id = ids[i % ids.size()];
            const Schema& schema = schemas.at(schema_id);
            auto it = samplers.find(schema_id);
            if (it == samplers.end()) {
                GrammarConfig g = config.grammar;
                g.seed = derive_seed(config.seed, "sample:" + schema_id);
                it = samplers.emplace(schema_id, std::make_unique<SqlSampler>(schema, g)).first;
            }
            PretrainExample ex;
            ex.example_id = "sample-" + zero_pad(i, 6);
            ex.schema_id = schema_id;
            ex.sql = it->second->next();
            ex.question = Question::from_text(synthesize_question(ex.sql, schema));
            ex.provenance = "sampled";
            corpus.push_back(std::move(ex));
        }
        log_info("sampled " + std::to_string(config.sample_count) + " examples");
    }

    if (!config.pairs_path.empty()) {
        IngestResult ingested = ingest_pairs(config.pairs_path, schemas);
        std::set<std::string> used;
        for (const PretrainExample& ex : corpus) used.insert(ex.example_id);
        for (PretrainExample& ex : ingested.accepted) {
            if (!used.insert(ex.example_id).second) {
                RejectRecord r;
                r.original = ex.to_json(schemas.at(ex.schema_id));
                r.reason = "example_id '" + ex.example_id + "' collides with a sampled record";
                rejects.push_back(std::move(r));
                continue;
            }
            corpus.push_back(std::move(ex));
        }
        for (RejectRecord& r : ingested.rejects) rejects.push_back(std::move(r));
    }

    if (config.stages.label) {
        for (PretrainExample& ex : corpus) {
            ex.dependencies =
                derive_dependencies(ex.question, ex.sql, schemas.at(ex.schema_id), config.tau);
        }
        log_info("labeled " + std::to_string(corpus.size()) + " examples");
    }
    if (config.stages.difficulty && !corpus.empty()) {
        const std::vector<double> diffs = compute_difficulties(corpus, schemas);
        for (std::size_t i = 0; i < corpus.size(); ++i) corpus[i].difficulty = diffs[i];
    }
    if (config.stages.objectives) {
        for (PretrainExample& ex : corpus) {
            MaskPlan plan =
                plan_mlm(ex, config.mlm_ratio, derive_seed(config.seed, ex.example_id + ":mlm"));
            MaskPlan vals =
                plan_value_replacement(ex, schemas.at(ex.schema_id), config.value_prob,
                                       derive_seed(config.seed, ex.example_id + ":vals"));
            plan.column_replacements = std::move(vals.column_replacements);
            ex.mask_plan = std::move(plan);
            if (ex.dependencies)
                ex.epr = perturb_entities(ex, derive_seed(config.seed, ex.example_id + ":epr"));
        }
    }

    fs::create_directories(config.out_dir);
    const std::string out_dir = config.out_dir;
    {
        std::ofstream shard;
        std::size_t shard_index = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (i % kShardSize == 0) {
                shard_index = i / kShardSize;
                shard = open_output(out_dir + "/corpus-" + zero_pad(shard_index, 5) + ".jsonl");
            }
            const PretrainExample& ex = corpus[i];
            shard << ex.to_json(schemas.at(ex.schema_id)).dump() << "\n";
        }
        if (corpus.empty()) shard = open_output(out_dir + "/corpus-" + zero_pad(0, 5) + ".jsonl");
    }
    {
        std::ofstream out = open_output(out_dir + "/rejects.jsonl");
        for (const RejectRecord& r : rejects) {
            nlohmann::ordered_json doc;
            doc["record"] = r.original;
            doc["reason"] = r.reason;
            out << doc.dump() << "\n";
        }
    }
    fs::create_directories(out_dir + "/schemas");
    for (const auto& [id, schema] : schemas) {
        std::ofstream out =
            open_output(out_dir + "/schemas/" + sanitize_filename(id) + ".json");
        out << schema.to_json().dump(2) << "\n";
    }
    if (config.curriculum_steps > 0 && !corpus.empty()) {
        write_curriculum_trace(corpus, schemas, config.curriculum_steps, config.batch_size,
                               derive_seed(config.seed, "curriculum"), out_dir + "/curriculum.csv");
    }

    CorpusStats stats = report_stats(corpus, schemas, config.tau);
    stats.rejected_count = rejects.size();
    {
        std::ofstream out = open_output(out_dir + "/stats.json");
        out << stats.to_json().dump(2) << "\n";
    }
    log_info("wrote " + std::to_string(corpus.size()) + " records to '" + out_dir + "'");
    return stats;
}

}  // namespace forge
