#pragma once

#include <cstddef>
#include <vector>

namespace forge {

using Vec = std::vector<double>;

// Row-major dense matrix of 64-bit reals.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    Vec row(std::size_t i) const {
        return Vec(a.begin() + static_cast<std::ptrdiff_t>(i * cols),
                   a.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
    }

    bool operator==(const Mat&) const = default;
};

struct Tensor3 {
    std::size_t d0 = 0, d1 = 0, d2 = 0;
    std::vector<double> a;

    Tensor3() = default;
    Tensor3(std::size_t a0, std::size_t a1, std::size_t a2)
        : d0(a0), d1(a1), d2(a2), a(a0 * a1 * a2, 0.0) {}

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return a[(i * d1 + j) * d2 + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return a[(i * d1 + j) * d2 + k];
    }

    bool operator==(const Tensor3&) const = default;
};

}  // namespace forge
