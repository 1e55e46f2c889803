#pragma once

#include <cstdint>
#include <map>

#include "forge/corpus.hpp"

namespace forge {

// Token count of the serialized input: question tokens plus every
// column-name token of the schema (sentinels excluded).
std::size_t input_length(const PretrainExample& example, const Schema& schema);

// Min-max scaled lengths in [0,1]; a degenerate corpus (all lengths equal)
// maps to all zeros. Throws ContractViolation on an empty corpus.
std::vector<double> compute_difficulties(const std::vector<PretrainExample>& corpus,
                                         const std::map<std::string, Schema>& schemas);

struct CurriculumState {
    std::vector<double> difficulties;
    double min_d = 0.0;
    std::size_t T = 1;  // total training steps
    std::size_t t = 0;  // current step

    static CurriculumState make(std::vector<double> difficulties, std::size_t T);
};

// c(t) = sqrt(t * (1 - min_d^2) / T + min_d^2). The t = 0 and t = T
// endpoints return min_d and 1.0 exactly (no round trip through sqrt).
double competence(std::size_t t, std::size_t T, double min_d);

// Uniform draw without replacement from the admissible pool
// {i : d_i <= c(t)}; when the pool is smaller than batch_size it is padded
// with the easiest remaining examples in ascending difficulty order.
std::vector<std::size_t> sample_batch(const CurriculumState& state, std::size_t batch_size,
                                      std::uint64_t seed);

}  // namespace forge
