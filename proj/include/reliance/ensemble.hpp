#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "reliance/base_models.hpp"
#include "reliance/matrix.hpp"
#include "reliance/nn.hpp"

namespace reliance::ensemble {

struct BaseModelConfigs {
    models::LogRegConfig logreg;
    models::SvmConfig svm;
    models::ForestConfig forest;
    double mnb_alpha = 1.0;
    models::BiLstmConfig bilstm;
};

// Shared view of the training material. features rows align with labels;
// token_rows[i] holds word-vector row indices (BiLSTM path) for document i.
struct BaseInputs {
    const nn::Matrix* features = nullptr;
    const std::vector<std::vector<int>>* token_rows = nullptr;
    const nn::Matrix* word_vectors = nullptr;
    std::vector<int> labels;

    int size() const { return features ? features->rows() : 0; }
    nn::SeqView sequence(int row) const;
};

// A trainer fits one base model on the given rows and returns a scorer over
// row indices of the same inputs. Tests wrap these to audit leakage.
using ScoreRowFn = std::function<double(int)>;
using TrainFoldFn = std::function<ScoreRowFn(std::span<const int>, std::uint64_t)>;

struct TrainerSet {
    std::array<TrainFoldFn, models::kNumBaseModels> trainers;
};

// The five real trainers; closures keep references to `in` and `cfg`.
TrainerSet default_trainers(const BaseInputs& in, const BaseModelConfigs& cfg);

// Out-of-fold probabilities, N x 5 in BaseModelKind column order, plus the
// fold that held each row out.
struct MetaFeatures {
    nn::Matrix values;
    std::vector<int> row_fold;
    int folds = 0;
};

// threads > 1 trains folds concurrently; per-(model, fold) seeds keep the
// result identical to the sequential run. Trainers must then be callable
// from several threads at once (the default set is).
MetaFeatures build_meta_features(const BaseInputs& in, int k, std::uint64_t seed,
                                 const TrainerSet& trainers, int threads = 0);

// Literal reading without leakage control: every base model trains on all
// rows and scores them in-sample (row_fold stays -1).
MetaFeatures build_meta_features_insample(const BaseInputs& in, std::uint64_t seed,
                                          const TrainerSet& trainers);

struct StackConfig {
    int folds = 5;
    bool insample = false;
    int threads = 0;     // fold-grid parallelism; 0 = sequential
    nn::MlpConfig meta;  // hidden 64/128/64, tanh, alpha 1e-4, 50 epochs
    BaseModelConfigs base;
};

struct StackingModel {
    models::BaseModelSet base;  // retrained on the full training set
    nn::MlpModel meta;
    MetaFeatures train_meta;  // the matrix the meta model was fitted on
};

StackingModel train_stack(const BaseInputs& in, const StackConfig& config, std::uint64_t seed);

// Column order is fixed by kind, not by call order.
std::array<double, models::kNumBaseModels> assemble_meta_row(
    std::span<const std::pair<models::BaseModelKind, double>> scores);

struct StackPrediction {
    double probability = 0.0;  // fake
    int label = 0;             // fake iff probability >= 0.5
    std::array<double, models::kNumBaseModels> base_scores{};
};

StackPrediction predict(const StackingModel& model, const models::PredictInput& input);

}  // namespace reliance::ensemble
