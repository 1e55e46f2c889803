#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/deps.hpp"
#include "forge/schema.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

// One planned corruption of a column-name token: the token is swapped for a
// cell value from the same column, and the original token is the recovery
// target.
struct ColumnReplacement {
    ColumnId column;
    std::size_t token_index = 0;  // within the column's name tokens
    std::string replacement;
    std::string original;

    bool operator==(const ColumnReplacement&) const = default;
};

struct MaskPlan {
    std::vector<std::size_t> masked_question_positions;
    std::vector<ColumnReplacement> column_replacements;

    bool operator==(const MaskPlan&) const = default;
};

// Question with its primary-entity spans block-shuffled. permutation maps
// original entity rank -> shuffled slot; recovery_target maps shuffled
// slot -> original rank, so recovery_target[permutation[r]] == r.
struct PerturbedExample {
    std::vector<std::string> shuffled_tokens;
    std::vector<Span> entity_spans_original;
    std::vector<std::size_t> permutation;
    std::vector<std::size_t> recovery_target;

    bool operator==(const PerturbedExample&) const = default;
};

// The corpus record. Optional fields fill in as pipeline stages run:
// labeling adds dependencies, the difficulty stage adds difficulty, the
// objective stage adds mask_plan and epr.
struct PretrainExample {
    std::string example_id;
    std::string schema_id;
    Question question;
    SqlAst sql;
    std::string provenance = "sampled";  // "sampled" or "ingested"
    std::optional<DependencyGraph> dependencies;
    std::optional<double> difficulty;
    std::optional<MaskPlan> mask_plan;
    std::optional<PerturbedExample> epr;

    nlohmann::ordered_json to_json(const Schema& schema) const;
    static PretrainExample from_json(const nlohmann::json& doc, const Schema& schema);

    bool operator==(const PretrainExample&) const = default;
};

}  // namespace forge
