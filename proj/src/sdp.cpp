#include "forge/sdp.hpp"

#include <algorithm>
#include <cmath>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw ContractViolation(msg);
}

double to_signed_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void softmax_row(const double* logits, std::size_t k, double* out) {
    double mx = logits[0];
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, logits[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) z += (out[i] = std::exp(logits[i] - mx));
    for (std::size_t i = 0; i < k; ++i) out[i] /= z;
}

void fill_uniform(Rng& rng, double r, std::vector<double>& a) {
    for (double& v : a) v = rng.uniform(-r, r);
}

void push_entries(std::vector<double*>& out, FfnBlock& blk) {
    for (double& v : blk.W.a) out.push_back(&v);
    for (double& v : blk.b) out.push_back(&v);
}

void push_entries(std::vector<double*>& out, Biaffine& bi) {
    for (double& v : bi.U.a) out.push_back(&v);
    for (double& v : bi.W) out.push_back(&v);
    out.push_back(&bi.b);
}

}  // namespace

SdpParams SdpParams::zeros(const SdpDims& dims) {
    SdpParams p;
    p.dims = dims;
    for (FfnBlock* blk : {&p.edge_head, &p.label_head, &p.edge_dep, &p.label_dep}) {
        blk->W = Mat(dims.p, dims.h);
        blk->b = Vec(dims.p, 0.0);
    }
    auto zero_biaffine = [&dims](Biaffine& bi) {
        bi.U = Mat(dims.p, dims.p);
        bi.W = Vec(2 * dims.p, 0.0);
        bi.b = 0.0;
    };
    zero_biaffine(p.edge);
    p.label.resize(dims.labels);
    for (Biaffine& bi : p.label) zero_biaffine(bi);
    p.mlm_W = Mat(dims.vocab, dims.h);
    p.mlm_b = Vec(dims.vocab, 0.0);
    p.rank_W = Mat(dims.max_entities, dims.h);
    p.rank_b = Vec(dims.max_entities, 0.0);
    p.alpha = p.beta = p.gamma = 0.0;
    return p;
}

SdpParams SdpParams::init(const SdpDims& dims, std::uint64_t seed) {
    SdpParams p = zeros(dims);
    Rng rng(seed);
    const double r_ffn = std::sqrt(6.0 / static_cast<double>(dims.h + dims.p));
    for (FfnBlock* blk : {&p.edge_head, &p.label_head, &p.edge_dep, &p.label_dep})
        fill_uniform(rng, r_ffn, blk->W.a);
    const double r_u = std::sqrt(6.0 / static_cast<double>(2 * dims.p));
    const double r_w = std::sqrt(6.0 / static_cast<double>(2 * dims.p + 1));
    fill_uniform(rng, r_u, p.edge.U.a);
    fill_uniform(rng, r_w, p.edge.W);
    for (Biaffine& bi : p.label) {
        fill_uniform(rng, r_u, bi.U.a);
        fill_uniform(rng, r_w, bi.W);
    }
    fill_uniform(rng, std::sqrt(6.0 / static_cast<double>(dims.h + dims.vocab)), p.mlm_W.a);
    fill_uniform(rng, std::sqrt(6.0 / static_cast<double>(dims.h + dims.max_entities)), p.rank_W.a);
    p.alpha = p.beta = p.gamma = 1.0;
    return p;
}

std::vector<double*> SdpParams::sdp_entries() {
    std::vector<double*> out;
    for (FfnBlock* blk : {&edge_head, &label_head, &edge_dep, &label_dep}) push_entries(out, *blk);
    push_entries(out, edge);
    for (Biaffine& bi : label) push_entries(out, bi);
    return out;
}

std::vector<double*> SdpParams::mlm_entries() {
    std::vector<double*> out;
    for (double& v : mlm_W.a) out.push_back(&v);
    for (double& v : mlm_b) out.push_back(&v);
    return out;
}

std::vector<double*> SdpParams::rank_entries() {
    std::vector<double*> out;
    for (double& v : rank_W.a) out.push_back(&v);
    for (double& v : rank_b) out.push_back(&v);
    return out;
}

std::size_t token_bucket(std::string_view token, std::size_t vocab) {
    check(vocab > 0, "token_bucket: vocab must be positive");
    return derive_seed(0x746f6bULL, token) % vocab;
}

void toy_encode(const SerializedInput& input, std::size_t h, std::uint64_t seed, Mat* Q, Mat* S) {
    check(h >= 2, "toy_encode: h must be >= 2");
    const std::size_t len = input.tokens.size();
    Mat raw(len, h);
    for (std::size_t i = 0; i < len; ++i) {
        std::uint64_t state = derive_seed(seed, input.tokens[i]);
        for (std::size_t d = 0; d < h; ++d) {
            state = splitmix64(state);
            raw(i, d) = to_signed_unit(state);
        }
    }
    // One smoothing pass injects position information: equal tokens in
    // different neighborhoods come out different.
    Mat mixed(len, h);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t d = 0; d < h; ++d) {
            double v = 2.0 * raw(i, d);
            if (i > 0) v += raw(i - 1, d);
            if (i + 1 < len) v += raw(i + 1, d);
            mixed(i, d) = v / 4.0;
        }
    }
    const std::size_t n = input.question_span.second - input.question_span.first;
    *Q = Mat(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < h; ++d) (*Q)(i, d) = mixed(input.question_span.first + i, d);
    }
    *S = Mat(input.column_anchors.size(), h);
    for (std::size_t j = 0; j < input.column_anchors.size(); ++j) {
        const std::size_t at = input.column_anchors[j].second;
        for (std::size_t d = 0; d < h; ++d) (*S)(j, d) = mixed(at, d);
    }
}

Vec ffn_project(const Vec& x, const FfnBlock& block) {
    check(x.size() == block.W.cols && block.b.size() == block.W.rows,
          "ffn_project: dimension mismatch");
    Vec out(block.W.rows);
    for (std::size_t i = 0; i < block.W.rows; ++i) {
        double z = block.b[i];
        for (std::size_t j = 0; j < block.W.cols; ++j) z += block.W(i, j) * x[j];
        out[i] = z > 0.0 ? z : 0.0;
    }
    return out;
}

double biaffine(const Vec& x1, const Vec& x2, const Mat& U, const Vec& W, double b) {
    check(U.rows == x1.size() && U.cols == x2.size() && W.size() == x1.size() + x2.size(),
          "biaffine: dimension mismatch");
    double s = b;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        double ux = 0.0;
        for (std::size_t j = 0; j < x2.size(); ++j) ux += U(i, j) * x2[j];
        s += x1[i] * ux;
        s += W[i] * x1[i];
    }
    for (std::size_t j = 0; j < x2.size(); ++j) s += W[x1.size() + j] * x2[j];
    return s;
}

namespace {

// Shared forward pass: all four projections for every row.
struct Projections {
    std::vector<Vec> qd, ql;  // per question token
    std::vector<Vec> ch, cl;  // per column
};

Projections project_all(const Mat& Q, const Mat& S, const SdpParams& params) {
    Projections pr;
    pr.qd.reserve(Q.rows);
    pr.ql.reserve(Q.rows);
    for (std::size_t i = 0; i < Q.rows; ++i) {
        const Vec q = Q.row(i);
        pr.qd.push_back(ffn_project(q, params.edge_dep));
        pr.ql.push_back(ffn_project(q, params.label_dep));
    }
    pr.ch.reserve(S.rows);
    pr.cl.reserve(S.rows);
    for (std::size_t j = 0; j < S.rows; ++j) {
        const Vec c = S.row(j);
        pr.ch.push_back(ffn_project(c, params.edge_head));
        pr.cl.push_back(ffn_project(c, params.label_head));
    }
    return pr;
}

}  // namespace

PairScores score_pairs(const Mat& Q, const Mat& S, const SdpParams& params) {
    check(Q.cols == params.dims.h || Q.rows == 0, "score_pairs: Q width mismatch");
    check(S.cols == params.dims.h || S.rows == 0, "score_pairs: S width mismatch");
    const Projections pr = project_all(Q, S, params);
    PairScores out;
    out.edge_logits = Mat(Q.rows, S.rows);
    out.label_logits = Tensor3(Q.rows, S.rows, params.dims.labels);
    for (std::size_t i = 0; i < Q.rows; ++i) {
        for (std::size_t j = 0; j < S.rows; ++j) {
            out.edge_logits(i, j) =
                biaffine(pr.qd[i], pr.ch[j], params.edge.U, params.edge.W, params.edge.b);
            for (std::size_t l = 0; l < params.dims.labels; ++l) {
                out.label_logits(i, j, l) = biaffine(pr.ql[i], pr.cl[j], params.label[l].U,
                                                     params.label[l].W, params.label[l].b);
            }
        }
    }
    return out;
}

std::vector<std::vector<bool>> decide_edges(const PairScores& scores) {
    std::vector<std::vector<bool>> out(scores.edge_logits.rows,
                                       std::vector<bool>(scores.edge_logits.cols, false));
    for (std::size_t i = 0; i < scores.edge_logits.rows; ++i) {
        for (std::size_t j = 0; j < scores.edge_logits.cols; ++j)
            out[i][j] = scores.edge_logits(i, j) >= 0.0;
    }
    return out;
}

GoldGrid gold_from_graph(const DependencyGraph& graph, std::size_t n, std::size_t m,
                         const Schema& schema) {
    GoldGrid g;
    g.n = n;
    g.m = m;
    g.edge = Mat(n, m);
    g.label.assign(n * m, 0);
    for (const DependencyEdge& e : graph.edges) {
        if (e.head.is_limit) continue;  // no column, no grid cell
        const std::size_t j = schema.flat_index(e.head.column);
        for (std::size_t i = e.span.begin; i < e.span.end && i < n; ++i) {
            g.edge(i, j) = 1.0;
            int& slot = g.label[i * m + j];
            if (slot == 0) slot = static_cast<int>(e.label);
        }
    }
    return g;
}

SdpLossParts sdp_loss_from_scores(const PairScores& scores, const GoldGrid& gold, Mat* d_edge,
                                  Tensor3* d_label) {
    const std::size_t n = scores.edge_logits.rows;
    const std::size_t m = scores.edge_logits.cols;
    const std::size_t L = scores.label_logits.d2;
    check(gold.n == n && gold.m == m, "sdp_loss: gold grid shape mismatch");
    if (d_edge) *d_edge = Mat(n, m);
    if (d_label) *d_label = Tensor3(n, m, L);
    SdpLossParts parts;
    if (n == 0 || m == 0) return parts;
    const double inv = 1.0 / static_cast<double>(n * m);
    std::vector<double> probs(L);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double s = scores.edge_logits(i, j);
            const double y = gold.edge(i, j);
            parts.edge += inv * (softplus(s) - y * s);
            if (d_edge) (*d_edge)(i, j) = inv * (sigmoid(s) - y);

            softmax_row(&scores.label_logits.a[(i * m + j) * L], L, probs.data());
            const int target = gold.label_at(i, j);
            parts.label += inv * -std::log(std::max(probs[static_cast<std::size_t>(target)],
                                                    1e-300));
            if (d_label) {
                for (std::size_t l = 0; l < L; ++l) {
                    (*d_label)(i, j, l) =
                        inv * (probs[l] - (static_cast<int>(l) == target ? 1.0 : 0.0));
                }
            }
        }
    }
    return parts;
}

namespace {

// d(relu(Wx+b))/d{W,b} given upstream gradient on the activated output.
void ffn_backward(const Vec& x, const FfnBlock& block, const Vec& activated, const Vec& d_out,
                  FfnBlock* d_block) {
    for (std::size_t i = 0; i < block.W.rows; ++i) {
        if (activated[i] <= 0.0) continue;  // rectified away
        d_block->b[i] += d_out[i];
        for (std::size_t j = 0; j < block.W.cols; ++j) d_block->W(i, j) += d_out[i] * x[j];
    }
}

// Accumulates biaffine parameter grads and upstream grads for both inputs.
void biaffine_backward(const Vec& x1, const Vec& x2, const Biaffine& bi, double g, Biaffine* d_bi,
                       Vec* d_x1, Vec* d_x2) {
    const std::size_t p1 = x1.size(), p2 = x2.size();
    for (std::size_t i = 0; i < p1; ++i) {
        for (std::size_t j = 0; j < p2; ++j) {
            d_bi->U(i, j) += g * x1[i] * x2[j];
            (*d_x1)[i] += g * bi.U(i, j) * x2[j];
            (*d_x2)[j] += g * bi.U(i, j) * x1[i];
        }
    }
    for (std::size_t i = 0; i < p1; ++i) {
        d_bi->W[i] += g * x1[i];
        (*d_x1)[i] += g * bi.W[i];
    }
    for (std::size_t j = 0; j < p2; ++j) {
        d_bi->W[p1 + j] += g * x2[j];
        (*d_x2)[j] += g * bi.W[p1 + j];
    }
    d_bi->b += g;
}

}  // namespace

double sdp_loss(const Mat& Q, const Mat& S, const SdpParams& params, const GoldGrid& gold,
                SdpParams* grads, SdpLossParts* parts) {
    const Projections pr = project_all(Q, S, params);
    const std::size_t n = Q.rows, m = S.rows, L = params.dims.labels;

    PairScores scores;
    scores.edge_logits = Mat(n, m);
    scores.label_logits = Tensor3(n, m, L);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            scores.edge_logits(i, j) =
                biaffine(pr.qd[i], pr.ch[j], params.edge.U, params.edge.W, params.edge.b);
            for (std::size_t l = 0; l < L; ++l) {
                scores.label_logits(i, j, l) = biaffine(pr.ql[i], pr.cl[j], params.label[l].U,
                                                        params.label[l].W, params.label[l].b);
            }
        }
    }

    Mat d_edge;
    Tensor3 d_label;
    const SdpLossParts lp =
        sdp_loss_from_scores(scores, gold, grads ? &d_edge : nullptr, grads ? &d_label : nullptr);
    if (parts) *parts = lp;
    if (!grads) return lp.total();

    const std::size_t p = params.dims.p;
    std::vector<Vec> d_qd(n, Vec(p, 0.0)), d_ql(n, Vec(p, 0.0));
    std::vector<Vec> d_ch(m, Vec(p, 0.0)), d_cl(m, Vec(p, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            biaffine_backward(pr.qd[i], pr.ch[j], params.edge, d_edge(i, j), &grads->edge,
                              &d_qd[i], &d_ch[j]);
            for (std::size_t l = 0; l < L; ++l) {
                biaffine_backward(pr.ql[i], pr.cl[j], params.label[l], d_label(i, j, l),
                                  &grads->label[l], &d_ql[i], &d_cl[j]);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec q = Q.row(i);
        ffn_backward(q, params.edge_dep, pr.qd[i], d_qd[i], &grads->edge_dep);
        ffn_backward(q, params.label_dep, pr.ql[i], d_ql[i], &grads->label_dep);
    }
    for (std::size_t j = 0; j < m; ++j) {
        const Vec c = S.row(j);
        ffn_backward(c, params.edge_head, pr.ch[j], d_ch[j], &grads->edge_head);
        ffn_backward(c, params.label_head, pr.cl[j], d_cl[j], &grads->label_head);
    }
    return lp.total();
}

double epr_loss(const Mat& slot_logits, const std::vector<std::size_t>& recovery_target,
                Mat* d_logits) {
    const std::size_t k = slot_logits.rows;
    check(slot_logits.cols == k, "epr_loss: slot logits must be K x K");
    check(recovery_target.size() == k, "epr_loss: target size mismatch");
    if (d_logits) *d_logits = Mat(k, k);
    if (k == 0) return 0.0;
    std::vector<bool> seen(k, false);
    for (std::size_t r : recovery_target) {
        check(r < k && !seen[r], "epr_loss: recovery target is not a bijection");
        seen[r] = true;
    }
    const double inv = 1.0 / static_cast<double>(k);
    std::vector<double> probs(k);
    double loss = 0.0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        softmax_row(&slot_logits.a[slot * k], k, probs.data());
        loss += inv * -std::log(std::max(probs[recovery_target[slot]], 1e-300));
        if (d_logits) {
            for (std::size_t r = 0; r < k; ++r) {
                (*d_logits)(slot, r) =
                    inv * (probs[r] - (r == recovery_target[slot] ? 1.0 : 0.0));
            }
        }
    }
    return loss;
}

double mlm_loss(const Mat& reps, const std::vector<std::size_t>& targets, const SdpParams& params,
                SdpParams* grads) {
    check(reps.rows == targets.size(), "mlm_loss: reps/targets size mismatch");
    const std::size_t R = reps.rows;
    if (R == 0) return 0.0;
    check(reps.cols == params.dims.h, "mlm_loss: rep width mismatch");
    const std::size_t V = params.dims.vocab;
    const double inv = 1.0 / static_cast<double>(R);
    std::vector<double> logits(V), probs(V);
    double loss = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        check(targets[r] < V, "mlm_loss: target out of vocab range");
        for (std::size_t v = 0; v < V; ++v) {
            double z = params.mlm_b[v];
            for (std::size_t d = 0; d < reps.cols; ++d) z += params.mlm_W(v, d) * reps(r, d);
            logits[v] = z;
        }
        softmax_row(logits.data(), V, probs.data());
        loss += inv * -std::log(std::max(probs[targets[r]], 1e-300));
        if (grads) {
            for (std::size_t v = 0; v < V; ++v) {
                const double g = inv * (probs[v] - (v == targets[r] ? 1.0 : 0.0));
                grads->mlm_b[v] += g;
                for (std::size_t d = 0; d < reps.cols; ++d)
                    grads->mlm_W(v, d) += g * reps(r, d);
            }
        }
    }
    return loss;
}

double joint_loss(double l_mlm, double l_sdp, double l_epr, double alpha, double beta, double gamma,
                  JointGrads* grads) {
    check(alpha > 0.0 && beta > 0.0 && gamma > 0.0,
          "joint_loss: balance scalars must be positive");
    const double loss = l_mlm / (2.0 * alpha * alpha) + l_sdp / (2.0 * beta * beta) +
                        l_epr / (2.0 * gamma * gamma) + std::log(alpha * beta * gamma);
    if (grads) {
        grads->alpha = -l_mlm / (alpha * alpha * alpha) + 1.0 / alpha;
        grads->beta = -l_sdp / (beta * beta * beta) + 1.0 / beta;
        grads->gamma = -l_epr / (gamma * gamma * gamma) + 1.0 / gamma;
    }
    return loss;
}

void count_edge_f1(const PairScores& scores, const GoldGrid& gold, F1Counts* counts) {
    for (std::size_t i = 0; i < scores.edge_logits.rows; ++i) {
        for (std::size_t j = 0; j < scores.edge_logits.cols; ++j) {
            const bool pred = scores.edge_logits(i, j) >= 0.0;
            const bool is_gold = gold.edge(i, j) > 0.5;
            if (pred && is_gold) counts->tp += 1;
            else if (pred) counts->fp += 1;
            else if (is_gold) counts->fn += 1;
        }
    }
}

}  // namespace forge
