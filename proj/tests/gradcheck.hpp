#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "forge/sdp.hpp"

namespace gradcheck {

// df/dx at *x via central differences; restores *x afterwards.
template <class F>
double central(double* x, F&& f, double h = 1e-5) {
    const double keep = *x;
    *x = keep + h;
    const double up = f();
    *x = keep - h;
    const double down = f();
    *x = keep;
    return (up - down) / (2.0 * h);
}

// ||a - n|| / max(||a|| + ||n||, 1e-12) over flattened gradients.
inline double rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff += d * d;
        na += analytic[i] * analytic[i];
        nn += numeric[i] * numeric[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

// Smallest |relu preactivation| across all four projections; instances
// with a value near zero would make finite differences step across the
// kink and are skipped by callers.
inline double min_abs_preactivation(const forge::Mat& Q, const forge::Mat& S,
                                    const forge::SdpParams& params) {
    double best = 1e300;
    auto scan = [&best](const forge::Mat& X, const forge::FfnBlock& blk) {
        for (std::size_t i = 0; i < X.rows; ++i) {
            for (std::size_t r = 0; r < blk.W.rows; ++r) {
                double z = blk.b[r];
                for (std::size_t c = 0; c < blk.W.cols; ++c) z += blk.W(r, c) * X(i, c);
                best = std::min(best, std::abs(z));
            }
        }
    };
    scan(Q, params.edge_dep);
    scan(Q, params.label_dep);
    scan(S, params.edge_head);
    scan(S, params.label_head);
    return best;
}

}  // namespace gradcheck
