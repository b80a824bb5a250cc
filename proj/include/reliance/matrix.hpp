#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace reliance::nn {

// Dense row-major matrix of 64-bit reals. All training math runs in double
// so gradient checks and bit-exact reruns hold.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
        vals_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return vals_.size(); }

    double& operator()(int r, int c) {
        return vals_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
                     static_cast<std::size_t>(c)];
    }
    double operator()(int r, int c) const {
        return vals_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
                     static_cast<std::size_t>(c)];
    }

    double* row(int r) {
        return vals_.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_);
    }
    const double* row(int r) const {
        return vals_.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_);
    }
    std::span<double> row_span(int r) { return {row(r), static_cast<std::size_t>(cols_)}; }
    std::span<const double> row_span(int r) const {
        return {row(r), static_cast<std::size_t>(cols_)};
    }

    double* data() { return vals_.data(); }
    const double* data() const { return vals_.data(); }
    std::vector<double>& values() { return vals_; }
    const std::vector<double>& values() const { return vals_; }

    void fill(double v) { vals_.assign(vals_.size(), v); }
    bool all_finite() const;
    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix&) const = default;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> vals_;
};

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// out = W x  (W is rows x cols, x has cols entries, out has rows entries)
void matvec(const Matrix& w, std::span<const double> x, std::span<double> out);

// out += W^T x  (x has rows entries, out has cols entries)
void matvec_transpose_add(const Matrix& w, std::span<const double> x, std::span<double> out);

// W += a * x y^T  (x has rows entries, y has cols entries)
void rank1_update(Matrix& w, double a, std::span<const double> x, std::span<const double> y);

}  // namespace reliance::nn
