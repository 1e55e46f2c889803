#include "forge/curriculum.hpp"

#include <algorithm>
#include <cmath>

#include "forge/error.hpp"
#include "forge/rng.hpp"
#include "forge/serialize.hpp"

namespace forge {

std::size_t input_length(const PretrainExample& example, const Schema& schema) {
    std::size_t len = example.question.tokens.size();
    for (const Table& t : schema.tables) {
        for (const Column& c : t.columns) len += column_name_tokens(c).size();
    }
    return len;
}

std::vector<double> compute_difficulties(const std::vector<PretrainExample>& corpus,
                                         const std::map<std::string, Schema>& schemas) {
    if (corpus.empty()) throw ContractViolation("compute_difficulties: empty corpus");
    std::vector<std::size_t> lengths;
    lengths.reserve(corpus.size());
    for (const PretrainExample& ex : corpus) {
        auto it = schemas.find(ex.schema_id);
        if (it == schemas.end())
            throw Error("compute_difficulties: unknown schema_id '" + ex.schema_id + "'");
        lengths.push_back(input_length(ex, it->second));
    }
    const auto [lo_it, hi_it] = std::minmax_element(lengths.begin(), lengths.end());
    const std::size_t lo = *lo_it, hi = *hi_it;
    std::vector<double> out(lengths.size(), 0.0);
    if (hi == lo) return out;  // degenerate range -> all zeros
    for (std::size_t i = 0; i < lengths.size(); ++i)
        out[i] = static_cast<double>(lengths[i] - lo) / static_cast<double>(hi - lo);
    return out;
}

CurriculumState CurriculumState::make(std::vector<double> difficulties, std::size_t T) {
    if (difficulties.empty()) throw ContractViolation("curriculum: empty difficulty list");
    if (T < 1) throw ContractViolation("curriculum: T must be >= 1");
    CurriculumState s;
    s.min_d = *std::min_element(difficulties.begin(), difficulties.end());
    s.difficulties = std::move(difficulties);
    s.T = T;
    return s;
}

double competence(std::size_t t, std::size_t T, double min_d) {
    if (T < 1) throw ContractViolation("competence: T must be >= 1");
    if (t > T) throw ContractViolation("competence: t must be <= T");
    if (!(min_d >= 0.0 && min_d <= 1.0))
        throw ContractViolation("competence: min_d outside [0,1]");
    if (t == 0) return min_d;
    if (t == T) return 1.0;
    const double md2 = min_d * min_d;
    return std::sqrt(static_cast<double>(t) * (1.0 - md2) / static_cast<double>(T) + md2);
}

std::vector<std::size_t> sample_batch(const CurriculumState& state, std::size_t batch_size,
                                      std::uint64_t seed) {
    if (batch_size < 1) throw ContractViolation("sample_batch: batch_size must be >= 1");
    const double c = competence(state.t, state.T, state.min_d);
    std::vector<std::size_t> pool, rest;
    for (std::size_t i = 0; i < state.difficulties.size(); ++i) {
        (state.difficulties[i] <= c ? pool : rest).push_back(i);
    }
    Rng rng(seed);
    rng.shuffle(pool);
    if (pool.size() > batch_size) {
        pool.resize(batch_size);
        return pool;
    }
    // Underfull pool: pad with the easiest excluded examples.
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
        return state.difficulties[a] < state.difficulties[b];
    });
    for (std::size_t i = 0; i < rest.size() && pool.size() < batch_size; ++i)
        pool.push_back(rest[i]);
    return pool;
}

}  // namespace forge
