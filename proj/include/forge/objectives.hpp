#pragma once

#include <cstdint>

#include "forge/corpus.hpp"

namespace forge {

// Independently selects each question token with probability `ratio`;
// selected positions take the mask sentinel at training time.
MaskPlan plan_mlm(const PretrainExample& example, double ratio, std::uint64_t seed);

// Independently selects each column-name token with probability `prob` and
// swaps it for a uniformly drawn token of one of that column's cell
// values. Columns with an empty value pool are never touched.
MaskPlan plan_value_replacement(const PretrainExample& example, const Schema& schema, double prob,
                                std::uint64_t seed);

// Maximal contiguous runs of question tokens covered by at least one
// dependency edge span, left to right. Empty when the example carries no
// dependency graph.
std::vector<Span> identify_primary_entities(const PretrainExample& example);

// Uniformly shuffles the primary-entity blocks of the question; all other
// tokens keep their relative positions. K <= 1 yields the identity.
PerturbedExample perturb_entities(const PretrainExample& example, std::uint64_t seed);

// Entity slot positions inside shuffled_tokens: slot k holds the tokens of
// original entity recovery_target[k], so slot widths follow the entities
// that moved in.
std::vector<Span> shuffled_slot_spans(const PerturbedExample& perturbed);

}  // namespace forge
