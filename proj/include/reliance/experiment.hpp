#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reliance/corpus.hpp"
#include "reliance/embed.hpp"
#include "reliance/ensemble.hpp"
#include "reliance/metrics.hpp"
#include "reliance/splits.hpp"

namespace reliance::eval {

struct ExperimentConfig {
    std::string dataset_path;  // empty: use the synthetic corpus
    std::string stopwords_path = "data/stopwords_en.txt";
    corpus::SyntheticSpec synthetic;
    double subsample = 1.0;  // stratified fraction applied before the split
    SplitSpec split;
    embed::Doc2VecConfig doc2vec;
    ensemble::StackConfig stack;
    int infer_steps = 50;
    bool transductive = false;  // test documents keep their trained vectors
    int bilstm_cv_folds = 0;    // optional extra k-fold CV report for the BiLSTM
    std::uint64_t master_seed = 42;
    int threads = 0;

    // Called as each pipeline stage finishes, with its wall time in seconds.
    std::function<void(const std::string&, double)> stage_hook;
};

struct ModelRow {
    std::string model;
    Metrics metrics;             // fractions
    double reference_accuracy;  // percent
};

struct ExperimentResult {
    std::vector<ModelRow> rows;  // five base models then "Ensemble"
    std::optional<Metrics> bilstm_cv;
    int n_total = 0;
    int n_train = 0;
    int n_test = 0;
    std::uint64_t master_seed = 0;
    std::string config_digest;
    std::string created_at;

    embed::Doc2VecModel doc2vec;
    ensemble::StackingModel stack;
};

// Loads and preprocesses the configured corpus (labeled records with a body;
// records without one are dropped), or generates the synthetic corpus when
// no dataset path is set.
std::vector<corpus::Document> load_experiment_corpus(const ExperimentConfig& config);

// Full pipeline: preprocess, 80-20 split, embed, train five base models and
// the stack, score the held-out split. Failures carry their stage name.
ExperimentResult run_experiment(const ExperimentConfig& config);

// As above but scoring an already-trained model instead of training one.
ExperimentResult score_experiment(const ExperimentConfig& config,
                                  const embed::Doc2VecModel& doc2vec,
                                  const ensemble::StackingModel& stack);

// Report renderings. The CSV and Markdown bodies carry no timestamps; the
// JSON document holds created_at as its only volatile field.
std::string report_csv(const ExperimentResult& result);
std::string report_markdown(const ExperimentResult& result);
std::string report_json(const ExperimentResult& result);

// Re-render CSV/Markdown from a stored JSON report document.
std::string rerender_csv(const std::string& report_json_text);
std::string rerender_markdown(const std::string& report_json_text);

std::string timestamp_utc();

}  // namespace reliance::eval
