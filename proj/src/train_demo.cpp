#include "forge/sdp.hpp"

#include <algorithm>
#include <string>

#include "forge/curriculum.hpp"
#include "forge/error.hpp"
#include "forge/objectives.hpp"
#include "forge/rng.hpp"

namespace forge {

namespace {

const Schema& schema_for(const std::map<std::string, Schema>& schemas, const std::string& id) {
    auto it = schemas.find(id);
    if (it == schemas.end()) throw Error("train_demo: unknown schema_id '" + id + "'");
    return it->second;
}

// Edge-decision F1 without touching the 17 label biaffines; the per-step
// audit only needs edge logits.
void edge_only_f1(const Mat& Q, const Mat& S, const SdpParams& params, const GoldGrid& gold,
                  F1Counts* counts) {
    std::vector<Vec> ch(S.rows);
    for (std::size_t j = 0; j < S.rows; ++j) ch[j] = ffn_project(S.row(j), params.edge_head);
    for (std::size_t i = 0; i < Q.rows; ++i) {
        const Vec qd = ffn_project(Q.row(i), params.edge_dep);
        for (std::size_t j = 0; j < S.rows; ++j) {
            const bool pred =
                biaffine(qd, ch[j], params.edge.U, params.edge.W, params.edge.b) >= 0.0;
            const bool is_gold = gold.edge(i, j) > 0.5;
            if (pred && is_gold) counts->tp += 1;
            else if (pred) counts->fp += 1;
            else if (is_gold) counts->fn += 1;
        }
    }
}

// Serialized position of column-name token `token_index` of flat column
// `flat`: the run for a column ends at its anchor separator and starts
// right after the previous one.
std::size_t column_token_position(const SerializedInput& input, std::size_t flat,
                                  std::size_t token_index) {
    const std::size_t start =
        flat == 0 ? input.question_span.second + 1 : input.column_anchors[flat - 1].second + 1;
    const std::size_t pos = start + token_index;
    if (pos >= input.column_anchors[flat].second)
        throw ContractViolation("train_demo: replacement token index out of range");
    return pos;
}

// Everything about one example that does not change across steps: the
// encoder is frozen, so the clean, masked and shuffled encodings are all
// computed once.
struct Prepared {
    Mat Q, S;  // clean encoding
    GoldGrid gold;
    Mat mlm_reps;  // one row per recovery target, from the masked encoding
    std::vector<std::size_t> mlm_targets;
    std::size_t K = 0;  // 0 disables the EPR term
    Mat slot_reps;      // K x h, mean-pooled from the shuffled encoding
    std::vector<std::size_t> recovery_target;
};

Prepared prepare(const PretrainExample& raw, const Schema& schema, const SdpDims& dims,
                 std::uint64_t enc_seed, std::uint64_t seed) {
    PretrainExample ex = raw;
    if (!ex.dependencies)
        ex.dependencies = derive_dependencies(ex.question, ex.sql, schema, kDefaultTau);
    if (!ex.mask_plan) {
        MaskPlan plan = plan_mlm(ex, 0.25, derive_seed(seed, ex.example_id + ":mlm"));
        MaskPlan vals = plan_value_replacement(ex, schema, 0.25,
                                               derive_seed(seed, ex.example_id + ":vals"));
        plan.column_replacements = std::move(vals.column_replacements);
        ex.mask_plan = std::move(plan);
    }
    if (!ex.epr) ex.epr = perturb_entities(ex, derive_seed(seed, ex.example_id + ":epr"));

    Prepared out;
    const SerializedInput clean = serialize_input(ex.question, schema);
    toy_encode(clean, dims.h, enc_seed, &out.Q, &out.S);
    out.gold = gold_from_graph(*ex.dependencies, ex.question.tokens.size(), schema.column_count(),
                               schema);

    SerializedInput masked = clean;
    for (std::size_t pos : ex.mask_plan->masked_question_positions)
        masked.tokens[masked.question_span.first + pos] = std::string(kMaskToken);
    for (const ColumnReplacement& cr : ex.mask_plan->column_replacements) {
        const std::size_t flat = schema.flat_index(cr.column);
        masked.tokens[column_token_position(masked, flat, cr.token_index)] = cr.replacement;
    }
    Mat Qm, Sm;
    toy_encode(masked, dims.h, enc_seed, &Qm, &Sm);
    std::vector<Vec> reps;
    for (std::size_t pos : ex.mask_plan->masked_question_positions) {
        reps.push_back(Qm.row(pos));
        out.mlm_targets.push_back(token_bucket(ex.question.tokens[pos], dims.vocab));
    }
    for (const ColumnReplacement& cr : ex.mask_plan->column_replacements) {
        reps.push_back(Sm.row(schema.flat_index(cr.column)));
        out.mlm_targets.push_back(token_bucket(cr.original, dims.vocab));
    }
    out.mlm_reps = Mat(reps.size(), dims.h);
    for (std::size_t r = 0; r < reps.size(); ++r) {
        for (std::size_t d = 0; d < dims.h; ++d) out.mlm_reps(r, d) = reps[r][d];
    }

    const std::size_t k = ex.epr->entity_spans_original.size();
    if (k >= 2 && k <= dims.max_entities) {
        out.K = k;
        out.recovery_target = ex.epr->recovery_target;
        Question shuffled;
        shuffled.tokens = ex.epr->shuffled_tokens;
        shuffled.raw = join(shuffled.tokens, " ");
        Mat Qs, Ss;
        toy_encode(serialize_input(shuffled, schema), dims.h, enc_seed, &Qs, &Ss);
        const std::vector<Span> slots = shuffled_slot_spans(*ex.epr);
        out.slot_reps = Mat(k, dims.h);
        for (std::size_t s = 0; s < k; ++s) {
            for (std::size_t i = slots[s].begin; i < slots[s].end; ++i) {
                for (std::size_t d = 0; d < dims.h; ++d) out.slot_reps(s, d) += Qs(i, d);
            }
            const double inv = 1.0 / static_cast<double>(slots[s].size());
            for (std::size_t d = 0; d < dims.h; ++d) out.slot_reps(s, d) *= inv;
        }
    }
    return out;
}

}  // namespace

TrainResult train_demo(const std::vector<PretrainExample>& corpus,
                       const std::map<std::string, Schema>& schemas, std::size_t steps, double lr,
                       std::uint64_t seed) {
    if (corpus.empty()) throw ContractViolation("train_demo: empty corpus");
    if (corpus.size() > 64) throw ContractViolation("train_demo: corpus larger than 64 examples");
    if (steps == 0) throw ContractViolation("train_demo: steps must be positive");

    const SdpDims dims;
    SdpParams params = SdpParams::init(dims, derive_seed(seed, "params"));
    SdpParams grads = SdpParams::zeros(dims);
    const std::vector<double*> p_sdp = params.sdp_entries();
    const std::vector<double*> p_mlm = params.mlm_entries();
    const std::vector<double*> p_rank = params.rank_entries();
    const std::vector<double*> g_sdp = grads.sdp_entries();
    const std::vector<double*> g_mlm = grads.mlm_entries();
    const std::vector<double*> g_rank = grads.rank_entries();

    const std::uint64_t enc_seed = derive_seed(seed, "encoder");
    std::vector<Prepared> prep;
    prep.reserve(corpus.size());
    for (const PretrainExample& ex : corpus)
        prep.push_back(prepare(ex, schema_for(schemas, ex.schema_id), dims, enc_seed, seed));

    CurriculumState state = CurriculumState::make(compute_difficulties(corpus, schemas), steps);
    const std::size_t batch_size = std::min<std::size_t>(8, corpus.size());
    const std::uint64_t batch_seed = derive_seed(seed, "batch");

    TrainResult result;
    for (std::size_t step = 1; step <= steps; ++step) {
        state.t = step;
        const std::vector<std::size_t> batch =
            sample_batch(state, batch_size, derive_seed(batch_seed, step));

        for (double* g : g_sdp) *g = 0.0;
        for (double* g : g_mlm) *g = 0.0;
        for (double* g : g_rank) *g = 0.0;
        double l_sdp = 0.0, l_mlm = 0.0, l_epr = 0.0;
        for (std::size_t idx : batch) {
            const Prepared& pr = prep[idx];
            l_sdp += sdp_loss(pr.Q, pr.S, params, pr.gold, &grads);
            l_mlm += mlm_loss(pr.mlm_reps, pr.mlm_targets, params, &grads);
            if (pr.K >= 2) {
                Mat logits(pr.K, pr.K);
                for (std::size_t s = 0; s < pr.K; ++s) {
                    for (std::size_t r = 0; r < pr.K; ++r) {
                        double z = params.rank_b[r];
                        for (std::size_t d = 0; d < dims.h; ++d)
                            z += params.rank_W(r, d) * pr.slot_reps(s, d);
                        logits(s, r) = z;
                    }
                }
                Mat d_logits;
                l_epr += epr_loss(logits, pr.recovery_target, &d_logits);
                for (std::size_t s = 0; s < pr.K; ++s) {
                    for (std::size_t r = 0; r < pr.K; ++r) {
                        const double g = d_logits(s, r);
                        grads.rank_b[r] += g;
                        for (std::size_t d = 0; d < dims.h; ++d)
                            grads.rank_W(r, d) += g * pr.slot_reps(s, d);
                    }
                }
            }
        }
        const double inv_b = 1.0 / static_cast<double>(batch.size());
        l_sdp *= inv_b;
        l_mlm *= inv_b;
        l_epr *= inv_b;

        JointGrads jg;
        const double joint =
            joint_loss(l_mlm, l_sdp, l_epr, params.alpha, params.beta, params.gamma, &jg);

        const double sdp_scale = inv_b / (2.0 * params.beta * params.beta);
        const double mlm_scale = inv_b / (2.0 * params.alpha * params.alpha);
        const double rank_scale = inv_b / (2.0 * params.gamma * params.gamma);
        for (std::size_t i = 0; i < p_sdp.size(); ++i) *p_sdp[i] -= lr * sdp_scale * *g_sdp[i];
        for (std::size_t i = 0; i < p_mlm.size(); ++i) *p_mlm[i] -= lr * mlm_scale * *g_mlm[i];
        for (std::size_t i = 0; i < p_rank.size(); ++i) *p_rank[i] -= lr * rank_scale * *g_rank[i];
        params.alpha = std::max(1e-3, params.alpha - lr * jg.alpha);
        params.beta = std::max(1e-3, params.beta - lr * jg.beta);
        params.gamma = std::max(1e-3, params.gamma - lr * jg.gamma);

        F1Counts counts;
        for (const Prepared& pr : prep) edge_only_f1(pr.Q, pr.S, params, pr.gold, &counts);
        const double f1 = counts.f1();

        result.trace.push_back({step, l_mlm, l_sdp, l_epr, joint, params.alpha, params.beta,
                                params.gamma, f1});
        result.final_edge_f1 = f1;
        if (f1 == 1.0) break;  // fitted; later steps would only pad the trace
    }
    return result;
}

}  // namespace forge
