#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/linalg.hpp"
#include "forge/serialize.hpp"

namespace forge {

// out = relu(W x + b); W is p x h.
struct FfnBlock {
    Mat W;
    Vec b;
};

// Biaff(x1, x2) = x1' U x2 + W (x1 (+) x2) + b, with (+) concatenation.
struct Biaffine {
    Mat U;       // p x p
    Vec W;       // 2p
    double b = 0.0;
};

struct SdpDims {
    std::size_t h = 32;      // encoder width
    std::size_t p = 16;      // projection width
    std::size_t labels = 17;
    std::size_t vocab = 61;  // toy MLM bucket count
    std::size_t max_entities = 16;
};

// All trainable state: the four FFN projections, the edge biaffine, one
// biaffine per label, the toy MLM and EPR rank heads, and the
// loss-balance scalars.
struct SdpParams {
    SdpDims dims;
    FfnBlock edge_head, label_head, edge_dep, label_dep;
    Biaffine edge;
    std::vector<Biaffine> label;  // dims.labels entries
    Mat mlm_W;   // vocab x h
    Vec mlm_b;   // vocab
    Mat rank_W;  // max_entities x h
    Vec rank_b;  // max_entities
    double alpha = 1.0, beta = 1.0, gamma = 1.0;

    static SdpParams zeros(const SdpDims& dims);
    static SdpParams init(const SdpDims& dims, std::uint64_t seed);

    // Flat entry pointers in a fixed order; params and a zeros() gradient
    // holder line up index-for-index.
    std::vector<double*> sdp_entries();    // FFN blocks + biaffines
    std::vector<double*> mlm_entries();
    std::vector<double*> rank_entries();
};

// Deterministic hash embeddings mixed with one neighbor-averaging pass
// ((e[i-1] + 2 e[i] + e[i+1]) / 4, absent neighbors zero). Q gets the rows
// at question positions, S the rows at column anchors.
void toy_encode(const SerializedInput& input, std::size_t h, std::uint64_t seed, Mat* Q, Mat* S);

// Stable token -> class id for the toy MLM vocabulary.
std::size_t token_bucket(std::string_view token, std::size_t vocab);

Vec ffn_project(const Vec& x, const FfnBlock& block);

double biaffine(const Vec& x1, const Vec& x2, const Mat& U, const Vec& W, double b);

struct PairScores {
    Mat edge_logits;      // n x m
    Tensor3 label_logits; // n x m x labels
};

PairScores score_pairs(const Mat& Q, const Mat& S, const SdpParams& params);

// Edge iff logit >= 0 (the boundary itself counts as an edge).
std::vector<std::vector<bool>> decide_edges(const PairScores& scores);

// Token-level gold derived from edge spans: edge(i,j) = 1 iff question
// token i lies inside some edge span headed by column j. label(i,j) holds
// that edge's type and None where no edge exists; overlapping edges keep
// the first one in graph order. LIMIT pseudo-edges have no column and are
// skipped.
struct GoldGrid {
    std::size_t n = 0, m = 0;
    Mat edge;                // n x m of 0/1
    std::vector<int> label;  // n*m entries, values in [0, labels)

    int label_at(std::size_t i, std::size_t j) const { return label[i * m + j]; }
};

GoldGrid gold_from_graph(const DependencyGraph& graph, std::size_t n, std::size_t m,
                         const Schema& schema);

struct SdpLossParts {
    double edge = 0.0;
    double label = 0.0;
    double total() const { return edge + label; }
};

// Mean binary cross-entropy (with logits) over all n*m pairs plus mean
// 17-way softmax cross-entropy over all pairs. Optional outputs receive
// dLoss/dlogits.
SdpLossParts sdp_loss_from_scores(const PairScores& scores, const GoldGrid& gold,
                                  Mat* d_edge = nullptr, Tensor3* d_label = nullptr);

// Same loss evaluated from the encoder outputs, with analytic gradients
// for every SDP tensor accumulated into *grads (pass zeros()-initialized
// holder; alpha/beta/gamma and the MLM/rank heads are untouched).
double sdp_loss(const Mat& Q, const Mat& S, const SdpParams& params, const GoldGrid& gold,
                SdpParams* grads = nullptr, SdpLossParts* parts = nullptr);

// Mean K-way softmax cross-entropy over the K slots; recovery_target must
// be a bijection on {0..K-1}. K = 0 yields loss 0.
double epr_loss(const Mat& slot_logits, const std::vector<std::size_t>& recovery_target,
                Mat* d_logits = nullptr);

// Mean vocab-way cross-entropy of reps (R x h) against bucket targets,
// through the affine MLM head. Gradients accumulate into grads' MLM head.
double mlm_loss(const Mat& reps, const std::vector<std::size_t>& targets, const SdpParams& params,
                SdpParams* grads = nullptr);

struct JointGrads {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

// L = l_mlm/(2 a^2) + l_sdp/(2 b^2) + l_epr/(2 g^2) + log(a b g).
double joint_loss(double l_mlm, double l_sdp, double l_epr, double alpha, double beta,
                  double gamma, JointGrads* grads = nullptr);

struct F1Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
    // All-empty predictions against all-empty gold count as perfect.
    double f1() const {
        if (tp + fp + fn == 0) return 1.0;
        return 2.0 * static_cast<double>(tp) /
               (2.0 * static_cast<double>(tp) + static_cast<double>(fp) + static_cast<double>(fn));
    }
};

void count_edge_f1(const PairScores& scores, const GoldGrid& gold, F1Counts* counts);

struct TraceRow {
    std::size_t step = 0;
    double l_mlm = 0, l_sdp = 0, l_epr = 0, joint = 0;
    double alpha = 0, beta = 0, gamma = 0;
    double edge_f1 = 0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    double final_edge_f1 = 0.0;
};

// Plain gradient descent on the joint loss over a tiny labeled corpus
// (<= 64 examples) with curriculum-ordered batches and a frozen toy
// encoder. Deterministic per seed.
TrainResult train_demo(const std::vector<PretrainExample>& corpus,
                       const std::map<std::string, Schema>& schemas, std::size_t steps, double lr,
                       std::uint64_t seed);

}  // namespace forge
