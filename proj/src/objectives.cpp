#include "forge/objectives.hpp"

#include <algorithm>

#include "forge/error.hpp"
#include "forge/rng.hpp"
#include "forge/serialize.hpp"

namespace forge {

MaskPlan plan_mlm(const PretrainExample& example, double ratio, std::uint64_t seed) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ContractViolation("plan_mlm: ratio outside [0,1]");
    MaskPlan plan;
    Rng rng(seed);
    for (std::size_t i = 0; i < example.question.tokens.size(); ++i) {
        if (rng.bernoulli(ratio)) plan.masked_question_positions.push_back(i);
    }
    return plan;
}

MaskPlan plan_value_replacement(const PretrainExample& example, const Schema& schema, double prob,
                                std::uint64_t seed) {
    if (!(prob >= 0.0 && prob <= 1.0))
        throw ContractViolation("plan_value_replacement: prob outside [0,1]");
    (void)example;  // the plan depends only on the schema and the seed
    MaskPlan plan;
    Rng rng(seed);
    for (std::size_t f = 0; f < schema.column_count(); ++f) {
        const ColumnId id = schema.from_flat(f);
        const Column& col = schema.column(id);
        const std::vector<std::string> name_tokens = column_name_tokens(col);
        for (std::size_t ti = 0; ti < name_tokens.size(); ++ti) {
            if (col.values.empty()) continue;  // nothing to draw from
            if (!rng.bernoulli(prob)) continue;
            const std::string& value = col.values[rng.below(col.values.size())];
            const std::vector<std::string> value_tokens = tokenize(value);
            if (value_tokens.empty()) continue;
            ColumnReplacement rep;
            rep.column = id;
            rep.token_index = ti;
            rep.replacement = value_tokens[rng.below(value_tokens.size())];
            rep.original = name_tokens[ti];
            plan.column_replacements.push_back(std::move(rep));
        }
    }
    return plan;
}

std::vector<Span> identify_primary_entities(const PretrainExample& example) {
    if (!example.dependencies)
        throw ContractViolation("identify_primary_entities: example has no dependency graph");
    const std::size_t n = example.question.tokens.size();
    std::vector<bool> covered(n, false);
    for (const DependencyEdge& e : example.dependencies->edges) {
        for (std::size_t i = e.span.begin; i < e.span.end && i < n; ++i) covered[i] = true;
    }
    std::vector<Span> spans;
    std::size_t i = 0;
    while (i < n) {
        if (!covered[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && covered[j]) ++j;
        spans.push_back({i, j});
        i = j;
    }
    return spans;
}

PerturbedExample perturb_entities(const PretrainExample& example, std::uint64_t seed) {
    PerturbedExample out;
    out.entity_spans_original = identify_primary_entities(example);
    const std::size_t k = out.entity_spans_original.size();

    // slot_rank[k] = original rank of the entity placed into slot k.
    std::vector<std::size_t> slot_rank(k);
    for (std::size_t i = 0; i < k; ++i) slot_rank[i] = i;
    if (k > 1) {
        Rng rng(seed);
        rng.shuffle(slot_rank);
    }
    out.recovery_target = slot_rank;
    out.permutation.resize(k);
    for (std::size_t slot = 0; slot < k; ++slot) out.permutation[slot_rank[slot]] = slot;

    const std::vector<std::string>& toks = example.question.tokens;
    std::size_t cursor = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        const Span& here = out.entity_spans_original[slot];
        for (std::size_t i = cursor; i < here.begin; ++i) out.shuffled_tokens.push_back(toks[i]);
        const Span& src = out.entity_spans_original[slot_rank[slot]];
        for (std::size_t i = src.begin; i < src.end; ++i) out.shuffled_tokens.push_back(toks[i]);
        cursor = here.end;
    }
    for (std::size_t i = cursor; i < toks.size(); ++i) out.shuffled_tokens.push_back(toks[i]);
    return out;
}

std::vector<Span> shuffled_slot_spans(const PerturbedExample& perturbed) {
    std::vector<Span> slots;
    std::size_t pos = 0;        // cursor in shuffled tokens
    std::size_t prev_end = 0;   // cursor in original tokens
    for (std::size_t slot = 0; slot < perturbed.entity_spans_original.size(); ++slot) {
        const Span& here = perturbed.entity_spans_original[slot];
        pos += here.begin - prev_end;  // the gap is copied through unchanged
        const Span& src = perturbed.entity_spans_original[perturbed.recovery_target[slot]];
        slots.push_back({pos, pos + src.size()});
        pos += src.size();
        prev_end = here.end;
    }
    return slots;
}

}  // namespace forge
