#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "reliance/matrix.hpp"
#include "reliance/rng.hpp"

namespace test_helpers {

// Two Gaussian blobs around (-sep, 0...) and (+sep, 0...); label 1 = fake.
inline void make_blobs(int n_per_class, int dim, double sep, double stddev,
                       std::uint64_t seed, reliance::nn::Matrix& x, std::vector<int>& y) {
    reliance::Rng rng(seed);
    x = reliance::nn::Matrix(2 * n_per_class, dim);
    y.assign(static_cast<std::size_t>(2 * n_per_class), 0);
    auto gauss = [&rng] {
        const double u1 = rng.next_double() + 1e-12;
        const double u2 = rng.next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    };
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const int label = i < n_per_class ? 0 : 1;
        y[static_cast<std::size_t>(i)] = label;
        x(i, 0) = (label ? sep : -sep) + stddev * gauss();
        for (int j = 1; j < dim; ++j) x(i, j) = stddev * gauss();
    }
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb) + 1e-300);
}

// |a - b| relative to the larger magnitude. The floor keeps central-difference
// roundoff noise from dominating when both gradients are essentially zero.
inline double rel_err(double analytic, double numeric) {
    const double scale = std::max({1e-6, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / scale;
}

}  // namespace test_helpers
