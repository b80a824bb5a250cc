#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reliance/lstm.hpp"
#include "reliance/matrix.hpp"
#include "reliance/rng.hpp"

namespace reliance::models {

// Fixed ordering; it defines the meta-feature column layout.
enum class BaseModelKind : int {
    BiLstm = 0,
    LogReg = 1,
    Svm = 2,
    RandomForest = 3,
    NaiveBayes = 4,
};
inline constexpr int kNumBaseModels = 5;
inline constexpr std::array<BaseModelKind, kNumBaseModels> kBaseModelOrder = {
    BaseModelKind::BiLstm, BaseModelKind::LogReg, BaseModelKind::Svm,
    BaseModelKind::RandomForest, BaseModelKind::NaiveBayes};
const char* kind_name(BaseModelKind kind);

// ------------------------------------------------------------------ logreg

struct LogRegConfig {
    double l1_lambda = 1e-4;
    int max_iter = 1000;
    double tolerance = 1e-6;
};

// Mean logistic loss + l1_lambda * ||w||_1, minimized by proximal gradient
// (soft-threshold after each step). The intercept is not penalized.
struct LogRegModel {
    std::vector<double> weights;
    double bias = 0.0;
    LogRegConfig config;
    int iterations = 0;
};

LogRegModel train_logreg(const nn::Matrix& x, const std::vector<int>& y,
                         const LogRegConfig& config);
double logreg_score(const LogRegModel& model, std::span<const double> x);

// --------------------------------------------------------------------- svm

struct SvmConfig {
    double c = 1.0;
    double gamma = 0.0;  // <= 0 means 1 / (d * mean feature variance)
    double tolerance = 1e-3;
    std::size_t cache_bytes = std::size_t(256) << 20;
    std::int64_t max_iter = 1'000'000;
};

struct SvmModel {
    nn::Matrix support_vectors;
    std::vector<double> coeffs;         // alpha_i * y_i per support vector
    std::vector<int> sv_train_index;    // original training row of each SV
    double bias = 0.0;
    double gamma = 0.0;
    double platt_a = 0.0;
    double platt_b = 0.0;
    SvmConfig config;
    std::int64_t smo_iterations = 0;
    bool converged = false;
};

// Soft-margin RBF dual solved by SMO with maximal-violating-pair selection;
// kernel rows served from an LRU cache bounded by config.cache_bytes.
// Internally labels map to +1 (fake) / -1 (real).
SvmModel train_svm_smo(const nn::Matrix& x, const std::vector<int>& y, const SvmConfig& config);

double svm_decision(const SvmModel& model, std::span<const double> x);
double svm_score(const SvmModel& model, std::span<const double> x);

// Per-example KKT residuals of the trained model on its training set;
// all entries <= tolerance at convergence.
std::vector<double> svm_kkt_violations(const SvmModel& model, const nn::Matrix& x,
                                       const std::vector<int>& y);

// Fits p(fake | f) = 1 / (1 + exp(a*f + b)) by regularized maximum
// likelihood with smoothed targets; returns (a, b).
std::pair<double, double> platt_calibrate(std::span<const double> decisions,
                                          const std::vector<int>& labels);
double platt_probability(double decision, double a, double b);

// ------------------------------------------------------------------ forest

struct ForestConfig {
    int trees = 100;
    int min_samples_split = 2;
    std::uint64_t seed = 42;
    int threads = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int predict(std::span<const double> x) const;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    ForestConfig config;
};

// Bootstrap resamples, ceil(sqrt(d)) features per split, Gini gain with
// midpoint thresholds, grown until leaves are pure or too small to split.
// Ties break toward the lowest feature index, then the lowest threshold.
ForestModel train_forest(const nn::Matrix& x, const std::vector<int>& y,
                         const ForestConfig& config);
double forest_score(const ForestModel& model, std::span<const double> x);

// --------------------------------------------------------------------- mnb

struct MnbModel {
    nn::Matrix log_theta;  // 2 x d, rows sum to one in probability space
    std::array<double, 2> log_prior{0.0, 0.0};
    std::vector<double> feat_min;  // empty when inputs were already nonnegative
    std::vector<double> feat_max;
    double alpha = 1.0;
};

// Multinomial naive Bayes with additive smoothing and uniform priors.
// All features must be >= 0.
MnbModel train_mnb(const nn::Matrix& x, const std::vector<int>& y, double alpha);

// Wraps train_mnb for signed embeddings: min-max scales each dimension to
// [0, 1] using training ranges; scoring clips scaled values at zero.
MnbModel train_mnb_scaled(const nn::Matrix& x, const std::vector<int>& y, double alpha);

std::array<double, 2> mnb_posterior(const MnbModel& model, std::span<const double> x);
double mnb_score(const MnbModel& model, std::span<const double> x);

// ------------------------------------------------------------------ bilstm

struct BiLstmConfig {
    std::vector<int> widths = {64, 128, 64};
    int dense_units = 64;
    int max_seq_len = 256;
    int max_epochs = 25;
    int batch_size = 32;
    double learning_rate = 3e-4;
    double dropout = 0.2;
    int patience = 5;  // epochs without validation-accuracy improvement
    double val_fraction = 0.1;
    std::uint64_t seed = 42;
};

// Stacked bidirectional layers, mean pooling over time, one tanh dense
// layer, 2-way softmax.
struct BiLstmNet {
    std::vector<nn::BiLstmParams> layers;
    nn::Matrix dense_w;  // dense_units x last_layer_output
    nn::Matrix dense_b;  // 1 x dense_units
    nn::Matrix out_w;    // 2 x dense_units
    nn::Matrix out_b;    // 1 x 2
    int input_size = 0;

    static BiLstmNet create(int input_size, const std::vector<int>& widths, int dense_units,
                            std::uint64_t seed);
    std::vector<nn::Matrix*> parameters();
    std::vector<const nn::Matrix*> parameters() const;

    // Probabilities with dropout off; empty sequences see one zero step.
    std::array<double, 2> forward(const nn::SeqView& xs) const;
};

// Mean cross-entropy over a batch (dropout off); the finite-difference
// oracle for the network gradients.
double bilstm_net_loss(const BiLstmNet& net, const std::vector<nn::SeqView>& xs,
                       const std::vector<int>& labels);
// Analytic gradients aligned with net.parameters(); dropout applied when
// drop_rng is non-null. Returns the summed batch loss.
double bilstm_net_gradients(const BiLstmNet& net, const std::vector<nn::SeqView>& xs,
                            const std::vector<int>& labels, double dropout, Rng* drop_rng,
                            std::vector<nn::Matrix>& grads);

struct BiLstmTrainLog {
    int best_epoch = -1;     // 1-based
    int stopped_epoch = -1;  // 1-based
    std::vector<double> train_loss;
    std::vector<double> val_accuracy;
};

struct BiLstmModel {
    BiLstmNet net;
    BiLstmConfig config;
    BiLstmTrainLog log;
};

// Adam, dropout on every recurrent layer output, early stopping on a held
// out stratified validation slice with best-weight restore.
BiLstmModel train_bilstm(const std::vector<nn::SeqView>& sequences,
                         const std::vector<int>& labels, int input_size,
                         const BiLstmConfig& config);
double bilstm_score(const BiLstmModel& model, const nn::SeqView& xs);

// ---------------------------------------------------------------- dispatch

struct BaseModelSet {
    BiLstmModel bilstm;
    LogRegModel logreg;
    SvmModel svm;
    ForestModel forest;
    MnbModel mnb;
};

struct PredictInput {
    std::span<const double> features;  // document embedding
    nn::SeqView sequence;              // word-vector sequence (BiLSTM path)
};

// Positive-class (fake) probability from one base model.
double score(BaseModelKind kind, const BaseModelSet& models, const PredictInput& input);

}  // namespace reliance::models
