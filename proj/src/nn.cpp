#include "reliance/nn.hpp"

#include <algorithm>
#include <cmath>

#include "reliance/errors.hpp"
#include "reliance/rng.hpp"

namespace reliance::nn {

void adam_step(Matrix& params, const Matrix& grads, AdamState& state, double lr) {
    if (!params.same_shape(grads) || !params.same_shape(state.m))
        throw ShapeMismatchError("adam_step: parameter/gradient shapes differ");
    state.t += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    double* p = params.data();
    const double* g = grads.data();
    double* m = state.m.data();
    double* v = state.v.data();
    const std::size_t n = params.size();
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        if (!std::isfinite(p[i])) throw NumericOverflowError("adam_step: non-finite parameter");
    }
}

void softmax_inplace(std::span<double> logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    softmax_inplace(out);
    return out;
}

CrossEntropy cross_entropy_loss(std::span<const double> probs, int target) {
    CrossEntropy result;
    const double p = std::clamp(probs[static_cast<std::size_t>(target)], 1e-12, 1.0 - 1e-12);
    result.loss = -std::log(p);
    result.grad_logits.assign(probs.begin(), probs.end());
    result.grad_logits[static_cast<std::size_t>(target)] -= 1.0;
    return result;
}

void glorot_init(Matrix& w, int fan_in, int fan_out, std::uint64_t seed) {
    Rng rng(seed);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.values()) v = rng.next_double(-limit, limit);
}

namespace {

struct ForwardCache {
    std::vector<std::vector<double>> activations;  // per layer, post-activation
};

std::vector<double> forward_layers(const MlpModel& model, std::span<const double> x,
                                   ForwardCache* cache) {
    std::vector<double> cur(x.begin(), x.end());
    const std::size_t layers = model.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        std::vector<double> next(static_cast<std::size_t>(model.weights[l].rows()));
        matvec(model.weights[l], cur, next);
        const double* b = model.biases[l].data();
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += b[i];
        if (l + 1 < layers) {
            for (double& v : next) v = std::tanh(v);
        } else {
            softmax_inplace(next);
        }
        if (cache) cache->activations.push_back(next);
        cur = std::move(next);
    }
    return cur;
}

// Backprop for one sample; grads are accumulated into grad_w / grad_b.
double backward_one(const MlpModel& model, std::span<const double> x, int label,
                    std::vector<Matrix>& grad_w, std::vector<Matrix>& grad_b) {
    ForwardCache cache;
    std::vector<double> probs = forward_layers(model, x, &cache);
    CrossEntropy ce = cross_entropy_loss(probs, label);

    std::vector<double> delta = std::move(ce.grad_logits);  // dL/dlogits at output
    for (int l = static_cast<int>(model.weights.size()) - 1; l >= 0; --l) {
        std::span<const double> input =
            l == 0 ? x : std::span<const double>(cache.activations[static_cast<std::size_t>(l - 1)]);
        rank1_update(grad_w[static_cast<std::size_t>(l)], 1.0, delta, input);
        axpy(1.0, delta, grad_b[static_cast<std::size_t>(l)].row_span(0));
        if (l > 0) {
            std::vector<double> prev(input.size(), 0.0);
            matvec_transpose_add(model.weights[static_cast<std::size_t>(l)], delta, prev);
            const auto& act = cache.activations[static_cast<std::size_t>(l - 1)];
            for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= 1.0 - act[i] * act[i];
            delta = std::move(prev);
        }
    }
    return ce.loss;
}

void check_features(const MlpModel& model, const Matrix& features) {
    if (features.cols() != model.input_size())
        throw ShapeMismatchError("mlp: feature width " + std::to_string(features.cols()) +
                                 " does not match input size " +
                                 std::to_string(model.input_size()));
}

}  // namespace

std::vector<double> MlpModel::forward(std::span<const double> x) const {
    return forward_layers(*this, x, nullptr);
}

MlpModel mlp_train(const Matrix& features, const std::vector<int>& labels,
                   const MlpConfig& config, std::uint64_t seed) {
    const int n = features.rows();
    if (n < 2) throw EmptyInputError("mlp_train: need at least two samples");
    if (static_cast<int>(labels.size()) != n)
        throw ShapeMismatchError("mlp_train: label count does not match rows");
    const int classes = 1 + *std::max_element(labels.begin(), labels.end());
    if (std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; }))
        throw SingleClassError("mlp_train: all labels identical");

    MlpModel model;
    model.config = config;
    std::vector<int> sizes;
    sizes.push_back(features.cols());
    for (int h : config.hidden) sizes.push_back(h);
    sizes.push_back(std::max(classes, 2));

    Rng seeder(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Matrix w(sizes[l + 1], sizes[l]);
        glorot_init(w, sizes[l], sizes[l + 1], seeder.next_u64());
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(1, sizes[l + 1]);
    }

    std::vector<AdamState> w_state;
    std::vector<AdamState> b_state;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        w_state.push_back(AdamState::like(model.weights[l]));
        b_state.push_back(AdamState::like(model.biases[l]));
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    std::vector<Matrix> grad_w;
    std::vector<Matrix> grad_b;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        grad_w.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        grad_b.emplace_back(1, model.biases[l].cols());
    }

    Rng shuffler(seeder.next_u64());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffler.shuffle(order);
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += config.batch_size) {
            const int end = std::min(n, start + config.batch_size);
            const double inv = 1.0 / static_cast<double>(end - start);
            for (auto& g : grad_w) g.fill(0.0);
            for (auto& g : grad_b) g.fill(0.0);
            for (int bi = start; bi < end; ++bi) {
                const int row = order[static_cast<std::size_t>(bi)];
                epoch_loss += backward_one(model, features.row_span(row),
                                           labels[static_cast<std::size_t>(row)], grad_w, grad_b);
            }
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                double* g = grad_w[l].data();
                const double* w = model.weights[l].data();
                for (std::size_t i = 0; i < grad_w[l].size(); ++i)
                    g[i] = g[i] * inv + config.alpha * w[i];
                adam_step(model.weights[l], grad_w[l], w_state[l], config.learning_rate);
                for (std::size_t i = 0; i < grad_b[l].size(); ++i) grad_b[l].data()[i] *= inv;
                adam_step(model.biases[l], grad_b[l], b_state[l], config.learning_rate);
            }
        }
        model.epoch_loss.push_back(epoch_loss / static_cast<double>(n));

        int correct = 0;
        for (int i = 0; i < n; ++i) {
            std::vector<double> p = model.forward(features.row_span(i));
            const int pred = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            if (pred == labels[static_cast<std::size_t>(i)]) ++correct;
        }
        model.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
        if (!std::isfinite(model.epoch_loss.back()))
            throw NumericOverflowError("mlp_train: loss diverged");
    }
    return model;
}

std::vector<double> mlp_predict_proba(const MlpModel& model, const Matrix& features) {
    check_features(model, features);
    std::vector<double> out(static_cast<std::size_t>(features.rows()));
    for (int i = 0; i < features.rows(); ++i)
        out[static_cast<std::size_t>(i)] = model.forward(features.row_span(i))[1];
    return out;
}

double mlp_predict_proba_one(const MlpModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_size())
        throw ShapeMismatchError("mlp: feature width does not match input size");
    return model.forward(x)[1];
}

double mlp_batch_loss(const MlpModel& model, const Matrix& features,
                      const std::vector<int>& labels) {
    check_features(model, features);
    double loss = 0.0;
    for (int i = 0; i < features.rows(); ++i) {
        std::vector<double> probs = model.forward(features.row_span(i));
        loss += cross_entropy_loss(probs, labels[static_cast<std::size_t>(i)]).loss;
    }
    loss /= static_cast<double>(features.rows());
    double reg = 0.0;
    for (const auto& w : model.weights)
        for (double v : w.values()) reg += v * v;
    return loss + 0.5 * model.config.alpha * reg;
}

void mlp_batch_gradients(const MlpModel& model, const Matrix& features,
                         const std::vector<int>& labels, std::vector<Matrix>& grad_weights,
                         std::vector<Matrix>& grad_biases) {
    check_features(model, features);
    grad_weights.clear();
    grad_biases.clear();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        grad_weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        grad_biases.emplace_back(1, model.biases[l].cols());
    }
    for (int i = 0; i < features.rows(); ++i)
        backward_one(model, features.row_span(i), labels[static_cast<std::size_t>(i)],
                     grad_weights, grad_biases);
    const double inv = 1.0 / static_cast<double>(features.rows());
    for (std::size_t l = 0; l < grad_weights.size(); ++l) {
        double* g = grad_weights[l].data();
        const double* w = model.weights[l].data();
        for (std::size_t i = 0; i < grad_weights[l].size(); ++i)
            g[i] = g[i] * inv + model.config.alpha * w[i];
        for (std::size_t i = 0; i < grad_biases[l].size(); ++i) grad_biases[l].data()[i] *= inv;
    }
}

}  // namespace reliance::nn
