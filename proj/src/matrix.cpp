#include "reliance/matrix.hpp"

#include <cmath>

namespace reliance::nn {

bool Matrix::all_finite() const {
    for (double v : vals_)
        if (!std::isfinite(v)) return false;
    return true;
}

void matvec(const Matrix& w, std::span<const double> x, std::span<double> out) {
    const int rows = w.rows();
    const int cols = w.cols();
    for (int r = 0; r < rows; ++r) {
        const double* wr = w.row(r);
        double s = 0.0;
        for (int c = 0; c < cols; ++c) s += wr[c] * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
}

void matvec_transpose_add(const Matrix& w, std::span<const double> x, std::span<double> out) {
    const int rows = w.rows();
    const int cols = w.cols();
    for (int r = 0; r < rows; ++r) {
        const double* wr = w.row(r);
        const double xv = x[static_cast<std::size_t>(r)];
        if (xv == 0.0) continue;
        for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(c)] += xv * wr[c];
    }
}

void rank1_update(Matrix& w, double a, std::span<const double> x, std::span<const double> y) {
    const int rows = w.rows();
    const int cols = w.cols();
    for (int r = 0; r < rows; ++r) {
        double* wr = w.row(r);
        const double ax = a * x[static_cast<std::size_t>(r)];
        if (ax == 0.0) continue;
        for (int c = 0; c < cols; ++c) wr[c] += ax * y[static_cast<std::size_t>(c)];
    }
}

}  // namespace reliance::nn
