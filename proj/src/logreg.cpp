#include <algorithm>
#include <cmath>

#include "reliance/base_models.hpp"
#include "reliance/errors.hpp"

namespace reliance::models {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_both_classes(const std::vector<int>& y, const char* where) {
    bool has0 = false, has1 = false;
    for (int v : y) (v ? has1 : has0) = true;
    if (!has0 || !has1) throw SingleClassError(std::string(where) + ": needs both classes");
}

}  // namespace

const char* kind_name(BaseModelKind kind) {
    switch (kind) {
        case BaseModelKind::BiLstm: return "BiLSTM";
        case BaseModelKind::LogReg: return "LR";
        case BaseModelKind::Svm: return "SVM";
        case BaseModelKind::RandomForest: return "Random Forest";
        case BaseModelKind::NaiveBayes: return "Naive Bayes";
    }
    return "?";
}

LogRegModel train_logreg(const nn::Matrix& x, const std::vector<int>& y,
                         const LogRegConfig& config) {
    const int n = x.rows();
    const int d = x.cols();
    if (n < 2) throw EmptyInputError("train_logreg: need at least two samples");
    if (static_cast<int>(y.size()) != n)
        throw ShapeMismatchError("train_logreg: label count does not match rows");
    require_both_classes(y, "train_logreg");

    // Step size from the Lipschitz bound of the mean logistic gradient:
    // L <= max_i ||[x_i; 1]||^2 / 4.
    double max_norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = 1.0;
        const double* row = x.row(i);
        for (int j = 0; j < d; ++j) s += row[j] * row[j];
        max_norm2 = std::max(max_norm2, s);
    }
    const double step = 4.0 / max_norm2;

    LogRegModel model;
    model.config = config;
    model.weights.assign(static_cast<std::size_t>(d), 0.0);
    model.bias = 0.0;

    std::vector<double> grad_w(static_cast<std::size_t>(d));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int iter = 0; iter < config.max_iter; ++iter) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* row = x.row(i);
            double z = model.bias;
            for (int j = 0; j < d; ++j) z += model.weights[static_cast<std::size_t>(j)] * row[j];
            const double err = sigmoid(z) - static_cast<double>(y[static_cast<std::size_t>(i)]);
            for (int j = 0; j < d; ++j) grad_w[static_cast<std::size_t>(j)] += err * row[j];
            grad_b += err;
        }

        double max_delta = 0.0;
        const double shrink = step * config.l1_lambda;
        for (int j = 0; j < d; ++j) {
            const std::size_t s = static_cast<std::size_t>(j);
            const double old = model.weights[s];
            double w = old - step * grad_w[s] * inv_n;
            // soft threshold
            if (w > shrink)
                w -= shrink;
            else if (w < -shrink)
                w += shrink;
            else
                w = 0.0;
            model.weights[s] = w;
            max_delta = std::max(max_delta, std::abs(w - old));
        }
        const double old_b = model.bias;
        model.bias -= step * grad_b * inv_n;
        max_delta = std::max(max_delta, std::abs(model.bias - old_b));
        model.iterations = iter + 1;
        if (max_delta < config.tolerance) break;
    }
    return model;
}

double logreg_score(const LogRegModel& model, std::span<const double> x) {
    if (model.weights.empty()) throw UntrainedModelError("logreg_score: model not trained");
    if (x.size() != model.weights.size())
        throw ShapeMismatchError("logreg_score: feature width mismatch");
    return sigmoid(model.bias + nn::dot(x, model.weights));
}

}  // namespace reliance::models
