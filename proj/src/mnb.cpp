#include <algorithm>
#include <cmath>

#include "reliance/base_models.hpp"
#include "reliance/errors.hpp"

namespace reliance::models {
namespace {

void scale_row(const MnbModel& model, std::span<const double> x, std::vector<double>& out) {
    const std::size_t d = x.size();
    out.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = model.feat_min[j];
        const double hi = model.feat_max[j];
        double v = hi > lo ? (x[j] - lo) / (hi - lo) : 0.0;
        out[j] = std::max(0.0, v);  // clip below the training range
    }
}

}  // namespace

MnbModel train_mnb(const nn::Matrix& x, const std::vector<int>& y, double alpha) {
    const int n = x.rows();
    const int d = x.cols();
    if (n == 0) throw EmptyInputError("train_mnb: empty input");
    if (static_cast<int>(y.size()) != n)
        throw ShapeMismatchError("train_mnb: label count does not match rows");
    {
        bool has0 = false, has1 = false;
        for (int v : y) (v ? has1 : has0) = true;
        if (!has0 || !has1) throw SingleClassError("train_mnb: needs both classes");
    }

    nn::Matrix sums(2, d);
    for (int i = 0; i < n; ++i) {
        const int c = y[static_cast<std::size_t>(i)];
        const double* row = x.row(i);
        double* acc = sums.row(c);
        for (int j = 0; j < d; ++j) {
            if (row[j] < 0.0)
                throw NegativeFeatureError("train_mnb: negative feature at row " +
                                           std::to_string(i) + ", col " + std::to_string(j));
            acc[j] += row[j];
        }
    }

    MnbModel model;
    model.alpha = alpha;
    model.log_theta = nn::Matrix(2, d);
    for (int c = 0; c < 2; ++c) {
        double total = 0.0;
        for (int j = 0; j < d; ++j) total += sums(c, j);
        const double denom = total + alpha * static_cast<double>(d);
        for (int j = 0; j < d; ++j)
            model.log_theta(c, j) = std::log((sums(c, j) + alpha) / denom);
    }
    // fit_prior = false: uniform class priors
    model.log_prior = {std::log(0.5), std::log(0.5)};
    return model;
}

MnbModel train_mnb_scaled(const nn::Matrix& x, const std::vector<int>& y, double alpha) {
    const int n = x.rows();
    const int d = x.cols();
    if (n == 0) throw EmptyInputError("train_mnb_scaled: empty input");

    std::vector<double> lo(static_cast<std::size_t>(d), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
        double mn = x(0, j), mx = x(0, j);
        for (int i = 1; i < n; ++i) {
            mn = std::min(mn, x(i, j));
            mx = std::max(mx, x(i, j));
        }
        lo[static_cast<std::size_t>(j)] = mn;
        hi[static_cast<std::size_t>(j)] = mx;
    }

    nn::Matrix scaled(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            const std::size_t s = static_cast<std::size_t>(j);
            scaled(i, j) = hi[s] > lo[s] ? (x(i, j) - lo[s]) / (hi[s] - lo[s]) : 0.0;
        }

    MnbModel model = train_mnb(scaled, y, alpha);
    model.feat_min = std::move(lo);
    model.feat_max = std::move(hi);
    return model;
}

std::array<double, 2> mnb_posterior(const MnbModel& model, std::span<const double> x) {
    if (model.log_theta.rows() == 0) throw UntrainedModelError("mnb_posterior: model not trained");
    if (static_cast<int>(x.size()) != model.log_theta.cols())
        throw ShapeMismatchError("mnb_posterior: feature width mismatch");

    double lp0 = model.log_prior[0];
    double lp1 = model.log_prior[1];
    const double* t0 = model.log_theta.row(0);
    const double* t1 = model.log_theta.row(1);
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < 0.0) throw NegativeFeatureError("mnb_posterior: negative feature");
        lp0 += x[j] * t0[j];
        lp1 += x[j] * t1[j];
    }
    const double mx = std::max(lp0, lp1);
    const double e0 = std::exp(lp0 - mx);
    const double e1 = std::exp(lp1 - mx);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double mnb_score(const MnbModel& model, std::span<const double> x) {
    if (!model.feat_min.empty()) {
        std::vector<double> scaled;
        scale_row(model, x, scaled);
        return mnb_posterior(model, scaled)[1];
    }
    return mnb_posterior(model, x)[1];
}

}  // namespace reliance::models
