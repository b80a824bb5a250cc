#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reliance/matrix.hpp"

namespace reliance::nn {

struct AdamState {
    Matrix m;
    Matrix v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState like(const Matrix& params) {
        AdamState s;
        s.m = Matrix(params.rows(), params.cols());
        s.v = Matrix(params.rows(), params.cols());
        return s;
    }
};

// Standard Adam recurrence with bias correction:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(Matrix& params, const Matrix& grads, AdamState& state, double lr);

// Max-subtracted softmax; outputs sum to 1 for any finite input.
std::vector<double> softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> logits);

// loss = -ln p[target]; grad w.r.t. logits = p - onehot(target).
// Probabilities are clamped to [1e-12, 1-1e-12] before the log.
struct CrossEntropy {
    double loss;
    std::vector<double> grad_logits;
};
CrossEntropy cross_entropy_loss(std::span<const double> probs, int target);

// Uniform Glorot fill, seed-controlled.
void glorot_init(Matrix& w, int fan_in, int fan_out, std::uint64_t seed);

// Fully connected net: tanh hidden layers, softmax output, trained with Adam
// on mean cross-entropy plus alpha/2 * ||W||^2 (weights only, not biases).
struct MlpConfig {
    std::vector<int> hidden = {64, 128, 64};
    double alpha = 1e-4;  // L2 penalty
    int epochs = 50;
    double learning_rate = 1e-3;  // constant
    int batch_size = 32;
};

struct MlpModel {
    std::vector<Matrix> weights;  // layer l: out x in
    std::vector<Matrix> biases;   // 1 x out
    MlpConfig config;
    std::vector<double> epoch_loss;      // mean training loss per epoch
    std::vector<double> epoch_accuracy;  // training accuracy per epoch

    std::vector<double> forward(std::span<const double> x) const;  // class probabilities
    int input_size() const { return weights.empty() ? 0 : weights.front().cols(); }
    int output_size() const { return weights.empty() ? 0 : weights.back().rows(); }
};

// labels are class indices {0,1}; both classes must be present.
MlpModel mlp_train(const Matrix& features, const std::vector<int>& labels,
                   const MlpConfig& config, std::uint64_t seed);

// Probability of class 1 per row.
std::vector<double> mlp_predict_proba(const MlpModel& model, const Matrix& features);
double mlp_predict_proba_one(const MlpModel& model, std::span<const double> x);

// Loss and full analytic gradient on a batch, exposed so finite-difference
// checks can exercise every parameter of the network.
double mlp_batch_loss(const MlpModel& model, const Matrix& features,
                      const std::vector<int>& labels);
void mlp_batch_gradients(const MlpModel& model, const Matrix& features,
                         const std::vector<int>& labels, std::vector<Matrix>& grad_weights,
                         std::vector<Matrix>& grad_biases);

}  // namespace reliance::nn
