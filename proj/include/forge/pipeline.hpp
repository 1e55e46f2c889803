#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/corpus.hpp"
#include "forge/deps.hpp"
#include "forge/sql.hpp"

namespace forge {

// FORGE_LOG=info or FORGE_LOG=debug turns on progress lines on stderr;
// anything else (including unset) keeps the pipeline quiet.
bool log_enabled(int level);  // 1 = info, 2 = debug
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

struct StageToggles {
    bool label = true;
    bool difficulty = true;
    bool objectives = true;
};

struct PipelineConfig {
    std::uint64_t seed = 0;    // mandatory in the JSON form
    std::string schemas_path;  // file or directory
    std::string out_dir;
    std::string pairs_path;         // optional ingestion input
    std::size_t sample_count = 0;   // sampled records to generate
    GrammarConfig grammar;          // grammar.seed is ignored; derived from seed
    double tau = kDefaultTau;
    double mlm_ratio = 0.25;
    double value_prob = 0.25;
    std::size_t curriculum_steps = 0;  // > 0 writes a curriculum trace
    std::size_t batch_size = 8;
    StageToggles stages;

    static PipelineConfig from_json(const nlohmann::json& doc);
    static PipelineConfig from_file(const std::string& path);
    void validate() const;
};

struct RejectRecord {
    nlohmann::ordered_json original;
    std::string reason;
};

struct IngestResult {
    std::vector<PretrainExample> accepted;
    std::vector<RejectRecord> rejects;
};

// Loads one schema file (object or array of objects) or every *.json file
// of a directory in filename order. Duplicate schema ids are fatal and the
// error names both files.
std::map<std::string, Schema> ingest_schemas(const std::string& path);

// Reads {"example_id","schema_id","question","sql"} JSONL. Bad records
// (malformed JSON, unknown schema, unparseable SQL, duplicate id) are
// routed to rejects with a reason; nothing is dropped silently.
IngestResult ingest_pairs(const std::string& path, const std::map<std::string, Schema>& schemas);

struct CorpusStats {
    std::size_t example_count = 0;
    std::size_t rejected_count = 0;
    std::array<std::size_t, kDependencyTypeCount> dependency_histogram{};
    double difficulty_min = 0.0;
    double difficulty_median = 0.0;
    double difficulty_max = 0.0;
    std::array<std::size_t, 7> clause_coverage{};  // SELECT..LIMIT, Clause order
    double unmatched_mention_rate = 0.0;

    nlohmann::ordered_json to_json() const;
};

// Histogram over emitted edges, difficulty min/median/max, clause-family
// coverage, and the fraction of labeling targets with no matched span
// (re-derived; only counted for records that carry dependencies).
CorpusStats report_stats(const std::vector<PretrainExample>& corpus,
                         const std::map<std::string, Schema>& schemas, double tau);

// Per-step curriculum audit: one CSV row per training step with t, c(t),
// admissible pool size and the sampled example ids.
void write_curriculum_trace(const std::vector<PretrainExample>& corpus,
                            const std::map<std::string, Schema>& schemas, std::size_t steps,
                            std::size_t batch_size, std::uint64_t seed, const std::string& path);

// compose -> sample and/or ingest -> label -> difficulty -> objectives ->
// shard emission. Writes corpus-NNNNN.jsonl (50k records each),
// rejects.jsonl, stats.json and schemas/*.json under out_dir; every random
// choice derives from config.seed.
CorpusStats run_pipeline(const PipelineConfig& config);

inline constexpr std::size_t kShardSize = 50000;

}  // namespace forge
