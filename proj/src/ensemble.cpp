#include "reliance/ensemble.hpp"

#include <algorithm>
#include <memory>
#include <thread>

#include "reliance/errors.hpp"
#include "reliance/rng.hpp"
#include "reliance/splits.hpp"

namespace reliance::ensemble {
namespace {

using models::BaseModelKind;

nn::Matrix gather_rows(const nn::Matrix& src, std::span<const int> rows) {
    nn::Matrix out(static_cast<int>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(src.row(rows[i]), src.row(rows[i]) + src.cols(),
                  out.row(static_cast<int>(i)));
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const int> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (int r : rows) out.push_back(labels[static_cast<std::size_t>(r)]);
    return out;
}

}  // namespace

nn::SeqView BaseInputs::sequence(int row) const {
    nn::SeqView xs;
    const auto& rows = (*token_rows)[static_cast<std::size_t>(row)];
    xs.reserve(rows.size());
    for (int r : rows) xs.push_back(word_vectors->row_span(r));
    return xs;
}

TrainerSet default_trainers(const BaseInputs& in, const BaseModelConfigs& cfg) {
    TrainerSet set;

    set.trainers[static_cast<int>(BaseModelKind::BiLstm)] =
        [&in, &cfg](std::span<const int> rows, std::uint64_t seed) -> ScoreRowFn {
        std::vector<nn::SeqView> seqs;
        seqs.reserve(rows.size());
        for (int r : rows) seqs.push_back(in.sequence(r));
        models::BiLstmConfig bc = cfg.bilstm;
        bc.seed = seed;
        auto model = std::make_shared<models::BiLstmModel>(
            models::train_bilstm(seqs, gather_labels(in.labels, rows),
                                 in.word_vectors->cols(), bc));
        return [&in, model](int row) { return models::bilstm_score(*model, in.sequence(row)); };
    };

    set.trainers[static_cast<int>(BaseModelKind::LogReg)] =
        [&in, &cfg](std::span<const int> rows, std::uint64_t) -> ScoreRowFn {
        auto model = std::make_shared<models::LogRegModel>(models::train_logreg(
            gather_rows(*in.features, rows), gather_labels(in.labels, rows), cfg.logreg));
        return [&in, model](int row) {
            return models::logreg_score(*model, in.features->row_span(row));
        };
    };

    set.trainers[static_cast<int>(BaseModelKind::Svm)] =
        [&in, &cfg](std::span<const int> rows, std::uint64_t) -> ScoreRowFn {
        auto model = std::make_shared<models::SvmModel>(models::train_svm_smo(
            gather_rows(*in.features, rows), gather_labels(in.labels, rows), cfg.svm));
        return [&in, model](int row) {
            return models::svm_score(*model, in.features->row_span(row));
        };
    };

    set.trainers[static_cast<int>(BaseModelKind::RandomForest)] =
        [&in, &cfg](std::span<const int> rows, std::uint64_t seed) -> ScoreRowFn {
        models::ForestConfig fc = cfg.forest;
        fc.seed = seed;
        auto model = std::make_shared<models::ForestModel>(models::train_forest(
            gather_rows(*in.features, rows), gather_labels(in.labels, rows), fc));
        return [&in, model](int row) {
            return models::forest_score(*model, in.features->row_span(row));
        };
    };

    set.trainers[static_cast<int>(BaseModelKind::NaiveBayes)] =
        [&in, &cfg](std::span<const int> rows, std::uint64_t) -> ScoreRowFn {
        auto model = std::make_shared<models::MnbModel>(models::train_mnb_scaled(
            gather_rows(*in.features, rows), gather_labels(in.labels, rows), cfg.mnb_alpha));
        return [&in, model](int row) {
            return models::mnb_score(*model, in.features->row_span(row));
        };
    };

    return set;
}

MetaFeatures build_meta_features(const BaseInputs& in, int k, std::uint64_t seed,
                                 const TrainerSet& trainers, int threads) {
    const int n = in.size();
    if (k < 2) throw FoldTooSmallError("build_meta_features: k must be >= 2");

    auto folds = eval::k_fold(in.labels, k, derive_seed(seed, 31));
    for (std::size_t f = 0; f < folds.size(); ++f) {
        bool has0 = false, has1 = false;
        for (int i : folds[f].validation)
            (in.labels[static_cast<std::size_t>(i)] ? has1 : has0) = true;
        if (!has0 || !has1)
            throw FoldTooSmallError("build_meta_features: fold " + std::to_string(f) +
                                    " lacks a class");
    }

    MetaFeatures meta;
    meta.values = nn::Matrix(n, models::kNumBaseModels);
    meta.row_fold.assign(static_cast<std::size_t>(n), -1);
    meta.folds = k;

    auto process_fold = [&](int f) {
        const auto& fold = folds[static_cast<std::size_t>(f)];
        for (int i : fold.validation) meta.row_fold[static_cast<std::size_t>(i)] = f;
        for (int kind = 0; kind < models::kNumBaseModels; ++kind) {
            const std::uint64_t trainer_seed = derive_seed(
                seed, static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(f));
            ScoreRowFn scorer =
                trainers.trainers[static_cast<std::size_t>(kind)](fold.train, trainer_seed);
            for (int i : fold.validation) meta.values(i, kind) = scorer(i);
        }
    };

    if (threads <= 1) {
        for (int f = 0; f < k; ++f) process_fold(f);
    } else {
        // Folds write disjoint rows, so workers never touch the same cell.
        const int workers = std::min(threads, k);
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int f = w; f < k; f += workers) process_fold(f);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return meta;
}

MetaFeatures build_meta_features_insample(const BaseInputs& in, std::uint64_t seed,
                                          const TrainerSet& trainers) {
    const int n = in.size();
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;

    MetaFeatures meta;
    meta.values = nn::Matrix(n, models::kNumBaseModels);
    meta.row_fold.assign(static_cast<std::size_t>(n), -1);
    meta.folds = 0;

    for (int kind = 0; kind < models::kNumBaseModels; ++kind) {
        const std::uint64_t trainer_seed =
            derive_seed(seed, static_cast<std::uint64_t>(kind), 777);
        ScoreRowFn scorer = trainers.trainers[static_cast<std::size_t>(kind)](all, trainer_seed);
        for (int i = 0; i < n; ++i) meta.values(i, kind) = scorer(i);
    }
    return meta;
}

StackingModel train_stack(const BaseInputs& in, const StackConfig& config, std::uint64_t seed) {
    if (in.size() == 0) throw EmptyInputError("train_stack: empty training set");
    {
        bool has0 = false, has1 = false;
        for (int v : in.labels) (v ? has1 : has0) = true;
        if (!has0 || !has1) throw SingleClassError("train_stack: needs both classes");
    }

    // Fold training parallelizes across the fold grid; the forest keeps its
    // own tree-level threads for the final deployment fit only.
    BaseModelConfigs fold_cfg = config.base;
    fold_cfg.forest.threads = 0;
    TrainerSet trainers = default_trainers(in, fold_cfg);
    StackingModel model;
    model.train_meta =
        config.insample
            ? build_meta_features_insample(in, seed, trainers)
            : build_meta_features(in, config.folds, seed, trainers, config.threads);

    model.meta = nn::mlp_train(model.train_meta.values, in.labels, config.meta,
                               derive_seed(seed, 41));

    // Deployment models: retrain every base model on the full training set.
    std::vector<int> all(static_cast<std::size_t>(in.size()));
    for (int i = 0; i < in.size(); ++i) all[static_cast<std::size_t>(i)] = i;

    {
        std::vector<nn::SeqView> seqs;
        seqs.reserve(all.size());
        for (int r : all) seqs.push_back(in.sequence(r));
        models::BiLstmConfig bc = config.base.bilstm;
        bc.seed = derive_seed(seed, 51);
        model.base.bilstm =
            models::train_bilstm(seqs, in.labels, in.word_vectors->cols(), bc);
    }
    model.base.logreg = models::train_logreg(*in.features, in.labels, config.base.logreg);
    model.base.svm = models::train_svm_smo(*in.features, in.labels, config.base.svm);
    {
        models::ForestConfig fc = config.base.forest;
        fc.seed = derive_seed(seed, 52);
        model.base.forest = models::train_forest(*in.features, in.labels, fc);
    }
    model.base.mnb = models::train_mnb_scaled(*in.features, in.labels, config.base.mnb_alpha);
    return model;
}

std::array<double, models::kNumBaseModels> assemble_meta_row(
    std::span<const std::pair<models::BaseModelKind, double>> scores) {
    std::array<double, models::kNumBaseModels> row{};
    for (const auto& [kind, value] : scores) row[static_cast<std::size_t>(kind)] = value;
    return row;
}

StackPrediction predict(const StackingModel& model, const models::PredictInput& input) {
    StackPrediction out;
    std::vector<std::pair<models::BaseModelKind, double>> scores;
    scores.reserve(models::kNumBaseModels);
    for (BaseModelKind kind : models::kBaseModelOrder)
        scores.emplace_back(kind, models::score(kind, model.base, input));
    out.base_scores = assemble_meta_row(scores);
    out.probability = nn::mlp_predict_proba_one(
        model.meta, std::span<const double>(out.base_scores.data(), out.base_scores.size()));
    out.label = out.probability >= 0.5 ? 1 : 0;
    return out;
}

}  // namespace reliance::ensemble
