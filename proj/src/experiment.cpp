#include "reliance/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "reliance/errors.hpp"
#include "reliance/rng.hpp"

namespace reliance::eval {
namespace {

using nlohmann::json;

template <typename Fn>
auto stage(const ExperimentConfig& config, const char* name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        if (config.stage_hook)
            config.stage_hook(
                name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count());
    };
    try {
        auto result = fn();
        finish();
        return result;
    } catch (const StageError&) {
        throw;
    } catch (const NumericError& e) {
        throw StageError(name, e.what(), StageError::Kind::Numeric);
    } catch (const DataError& e) {
        throw StageError(name, e.what(), StageError::Kind::Data);
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), StageError::Kind::Numeric);
    }
}

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::vector<int> doc_labels(const std::vector<corpus::Document>& docs) {
    std::vector<int> labels;
    labels.reserve(docs.size());
    for (const auto& d : docs) {
        if (!d.label) throw DataError("experiment corpus must be fully labeled");
        labels.push_back(*d.label);
    }
    return labels;
}

std::vector<std::vector<int>> build_token_rows(const std::vector<corpus::Document>& docs,
                                               const embed::Vocabulary& vocab,
                                               int max_seq_len) {
    std::vector<std::vector<int>> rows;
    rows.reserve(docs.size());
    for (const auto& d : docs) {
        std::vector<int> r;
        for (const auto& t : d.tokens) {
            if (static_cast<int>(r.size()) >= max_seq_len) break;
            const int idx = vocab.index_of(t);
            if (idx >= 0) r.push_back(idx);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

struct TestScores {
    std::vector<ModelRow> rows;
};

TestScores score_test_docs(const ExperimentConfig& config, const embed::Doc2VecModel& d2v,
                           const ensemble::StackingModel& stack,
                           const std::vector<corpus::Document>& test_docs) {
    const int n_test = static_cast<int>(test_docs.size());
    nn::Matrix test_features(n_test, d2v.config.dim);
    for (int i = 0; i < n_test; ++i) {
        const auto& doc = test_docs[static_cast<std::size_t>(i)];
        if (config.transductive) {
            auto row = d2v.doc_vector(doc.id);
            std::copy(row.begin(), row.end(), test_features.row(i));
        } else {
            auto vec = embed::infer_vector(
                d2v, doc.tokens, config.infer_steps,
                derive_seed(config.master_seed, 3, static_cast<std::uint64_t>(doc.id)));
            std::copy(vec.begin(), vec.end(), test_features.row(i));
        }
    }
    embed::l2_normalize_rows(test_features);
    auto test_rows =
        build_token_rows(test_docs, d2v.vocab, config.stack.base.bilstm.max_seq_len);

    std::array<ConfusionMatrix, models::kNumBaseModels> base_confusion;
    ConfusionMatrix ensemble_confusion;
    for (int i = 0; i < n_test; ++i) {
        models::PredictInput input;
        input.features = test_features.row_span(i);
        nn::SeqView seq;
        for (int r : test_rows[static_cast<std::size_t>(i)])
            seq.push_back(d2v.word_in.row_span(r));
        input.sequence = seq;

        const int truth = *test_docs[static_cast<std::size_t>(i)].label;
        const auto pred = ensemble::predict(stack, input);
        ensemble_confusion.add(truth, pred.label);
        for (int k = 0; k < models::kNumBaseModels; ++k)
            base_confusion[static_cast<std::size_t>(k)].add(
                truth, pred.base_scores[static_cast<std::size_t>(k)] >= 0.5 ? 1 : 0);
    }

    TestScores scores;
    for (int k = 0; k < models::kNumBaseModels; ++k) {
        ModelRow row;
        row.model = models::kind_name(models::kBaseModelOrder[static_cast<std::size_t>(k)]);
        row.metrics = compute_metrics(base_confusion[static_cast<std::size_t>(k)]);
        row.reference_accuracy = reference_accuracy(row.model);
        scores.rows.push_back(std::move(row));
    }
    ModelRow ens;
    ens.model = "Ensemble";
    ens.metrics = compute_metrics(ensemble_confusion);
    ens.reference_accuracy = reference_accuracy("Ensemble");
    scores.rows.push_back(std::move(ens));
    return scores;
}

struct PreparedCorpus {
    std::vector<corpus::Document> docs;
    std::vector<int> labels;
    TrainTestSplit split;
};

PreparedCorpus prepare_corpus(const ExperimentConfig& config) {
    PreparedCorpus prep;
    prep.docs = stage(config, "load-corpus", [&] { return load_experiment_corpus(config); });

    if (config.subsample < 1.0) {
        stage(config, "subsample", [&] {
            auto labels = doc_labels(prep.docs);
            auto keep = stratified_subsample(labels, config.subsample,
                                             derive_seed(config.master_seed, 5));
            std::vector<corpus::Document> subset;
            subset.reserve(keep.size());
            for (int i : keep)
                subset.push_back(std::move(prep.docs[static_cast<std::size_t>(i)]));
            prep.docs = std::move(subset);
            return 0;
        });
    }

    prep.labels = doc_labels(prep.docs);
    prep.split = stage(config, "split", [&] { return split_train_test(prep.labels, config.split); });
    return prep;
}

json rows_to_json(const std::vector<ModelRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"model", r.model},
                       {"precision", r.metrics.precision * 100.0},
                       {"recall", r.metrics.recall * 100.0},
                       {"f1", r.metrics.f1 * 100.0},
                       {"accuracy", r.metrics.accuracy * 100.0},
                       {"reference_accuracy", r.reference_accuracy},
                       {"degenerate", r.metrics.degenerate}});
    }
    return arr;
}

std::string csv_from_rows(const json& rows) {
    std::string out = "model,precision,recall,f1,accuracy\n";
    for (const auto& r : rows) {
        out += r.at("model").get<std::string>();
        out += ',';
        out += two_decimals(r.at("precision").get<double>());
        out += ',';
        out += two_decimals(r.at("recall").get<double>());
        out += ',';
        out += two_decimals(r.at("f1").get<double>());
        out += ',';
        out += two_decimals(r.at("accuracy").get<double>());
        out += '\n';
    }
    return out;
}

std::string markdown_from_rows(const json& rows) {
    std::string out;
    out += "| Model | Precision | Recall | F1 | Accuracy | Reference accuracy |\n";
    out += "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out += "| " + r.at("model").get<std::string>();
        out += " | " + two_decimals(r.at("precision").get<double>());
        out += " | " + two_decimals(r.at("recall").get<double>());
        out += " | " + two_decimals(r.at("f1").get<double>());
        out += " | " + two_decimals(r.at("accuracy").get<double>());
        out += " | " + two_decimals(r.at("reference_accuracy").get<double>());
        out += " |\n";
    }
    out += "\n### Published baselines\n\n";
    out += "| Model | Precision | Recall | F1 | Accuracy |\n";
    out += "|---|---:|---:|---:|---:|\n";
    for (const auto& b : baseline_table()) {
        auto cell = [](const std::optional<double>& v) {
            return v ? two_decimals(*v) : std::string("-");
        };
        out += "| " + b.name + " | " + cell(b.precision) + " | " + cell(b.recall) + " | " +
               cell(b.f1) + " | " + cell(b.accuracy) + " |\n";
    }
    return out;
}

}  // namespace

std::vector<corpus::Document> load_experiment_corpus(const ExperimentConfig& config) {
    if (config.dataset_path.empty())
        return corpus::synthetic_corpus(config.synthetic, derive_seed(config.master_seed, 4));

    auto records = corpus::load_dataset(config.dataset_path, /*expect_labels=*/true);
    auto stopwords = corpus::StopwordList::load(config.stopwords_path);
    std::vector<corpus::Document> docs;
    docs.reserve(records.size());
    for (const auto& rec : records) {
        if (!rec.body.has_value()) continue;  // no text, no signal
        docs.push_back(corpus::preprocess(rec, stopwords));
    }
    return docs;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    PreparedCorpus prep = prepare_corpus(config);

    std::vector<corpus::Document> train_docs, test_docs;
    for (int i : prep.split.train) train_docs.push_back(prep.docs[static_cast<std::size_t>(i)]);
    for (int i : prep.split.test) test_docs.push_back(prep.docs[static_cast<std::size_t>(i)]);

    ExperimentResult result;
    result.n_total = static_cast<int>(prep.docs.size());
    result.n_train = static_cast<int>(train_docs.size());
    result.n_test = static_cast<int>(test_docs.size());
    result.master_seed = config.master_seed;
    result.created_at = timestamp_utc();

    result.doc2vec = stage(config, "doc2vec", [&] {
        embed::Doc2VecConfig d2v = config.doc2vec;
        d2v.seed = derive_seed(config.master_seed, 1);
        if (config.transductive) {
            std::vector<corpus::Document> all = train_docs;
            all.insert(all.end(), test_docs.begin(), test_docs.end());
            return embed::train_doc2vec(all, d2v, config.threads);
        }
        return embed::train_doc2vec(train_docs, d2v, config.threads);
    });

    nn::Matrix train_features = stage(config, "embed", [&] {
        nn::Matrix features = embed::embed_corpus(result.doc2vec, train_docs);
        embed::l2_normalize_rows(features);
        return features;
    });
    auto train_rows = build_token_rows(train_docs, result.doc2vec.vocab,
                                       config.stack.base.bilstm.max_seq_len);

    result.stack = stage(config, "stack", [&] {
        ensemble::BaseInputs inputs;
        inputs.features = &train_features;
        inputs.token_rows = &train_rows;
        inputs.word_vectors = &result.doc2vec.word_in;
        inputs.labels = doc_labels(train_docs);
        ensemble::StackConfig stack_cfg = config.stack;
        stack_cfg.threads = config.threads;
        stack_cfg.base.forest.threads = config.threads;
        return ensemble::train_stack(inputs, stack_cfg, derive_seed(config.master_seed, 2));
    });

    TestScores scores = stage(config, "score", [&] {
        return score_test_docs(config, result.doc2vec, result.stack, test_docs);
    });
    result.rows = std::move(scores.rows);

    if (config.bilstm_cv_folds >= 2) {
        stage(config, "bilstm-cv", [&] {
            auto labels = doc_labels(train_docs);
            auto folds =
                k_fold(labels, config.bilstm_cv_folds, derive_seed(config.master_seed, 6));
            ConfusionMatrix confusion;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                std::vector<nn::SeqView> seqs;
                std::vector<int> fold_labels;
                for (int i : folds[f].train) {
                    nn::SeqView seq;
                    for (int r : train_rows[static_cast<std::size_t>(i)])
                        seq.push_back(result.doc2vec.word_in.row_span(r));
                    seqs.push_back(std::move(seq));
                    fold_labels.push_back(labels[static_cast<std::size_t>(i)]);
                }
                models::BiLstmConfig bc = config.stack.base.bilstm;
                bc.seed = derive_seed(config.master_seed, 7, f);
                auto model = models::train_bilstm(seqs, fold_labels,
                                                  result.doc2vec.word_in.cols(), bc);
                for (int i : folds[f].validation) {
                    nn::SeqView seq;
                    for (int r : train_rows[static_cast<std::size_t>(i)])
                        seq.push_back(result.doc2vec.word_in.row_span(r));
                    const double p = models::bilstm_score(model, seq);
                    confusion.add(labels[static_cast<std::size_t>(i)], p >= 0.5 ? 1 : 0);
                }
            }
            result.bilstm_cv = compute_metrics(confusion);
            return 0;
        });
    }
    return result;
}

ExperimentResult score_experiment(const ExperimentConfig& config,
                                  const embed::Doc2VecModel& doc2vec,
                                  const ensemble::StackingModel& stack) {
    PreparedCorpus prep = prepare_corpus(config);
    std::vector<corpus::Document> test_docs;
    for (int i : prep.split.test) test_docs.push_back(prep.docs[static_cast<std::size_t>(i)]);

    ExperimentResult result;
    result.n_total = static_cast<int>(prep.docs.size());
    result.n_train = static_cast<int>(prep.split.train.size());
    result.n_test = static_cast<int>(test_docs.size());
    result.master_seed = config.master_seed;
    result.created_at = timestamp_utc();
    TestScores scores =
        stage(config, "score", [&] { return score_test_docs(config, doc2vec, stack, test_docs); });
    result.rows = std::move(scores.rows);
    return result;
}

std::string report_csv(const ExperimentResult& result) {
    return csv_from_rows(rows_to_json(result.rows));
}

std::string report_markdown(const ExperimentResult& result) {
    std::string out = "## Evaluation results (percent)\n\n";
    out += markdown_from_rows(rows_to_json(result.rows));
    if (result.bilstm_cv) {
        out += "\nBiLSTM k-fold CV accuracy: " +
               two_decimals(result.bilstm_cv->accuracy * 100.0) + "\n";
    }
    return out;
}

std::string report_json(const ExperimentResult& result) {
    json doc;
    doc["config_digest"] = result.config_digest;
    doc["master_seed"] = result.master_seed;
    doc["created_at"] = result.created_at;
    doc["seeds"] = {{"master", result.master_seed},
                    {"doc2vec", derive_seed(result.master_seed, 1)},
                    {"stack", derive_seed(result.master_seed, 2)},
                    {"synthetic_corpus", derive_seed(result.master_seed, 4)},
                    {"subsample", derive_seed(result.master_seed, 5)}};
    doc["counts"] = {{"total", result.n_total},
                     {"train", result.n_train},
                     {"test", result.n_test}};
    doc["rows"] = rows_to_json(result.rows);
    if (result.bilstm_cv) {
        doc["bilstm_cv"] = {{"precision", result.bilstm_cv->precision * 100.0},
                            {"recall", result.bilstm_cv->recall * 100.0},
                            {"f1", result.bilstm_cv->f1 * 100.0},
                            {"accuracy", result.bilstm_cv->accuracy * 100.0}};
    }
    json baselines = json::array();
    for (const auto& b : baseline_table()) {
        json row;
        row["model"] = b.name;
        row["precision"] = b.precision ? json(*b.precision) : json(nullptr);
        row["recall"] = b.recall ? json(*b.recall) : json(nullptr);
        row["f1"] = b.f1 ? json(*b.f1) : json(nullptr);
        row["accuracy"] = b.accuracy ? json(*b.accuracy) : json(nullptr);
        baselines.push_back(row);
    }
    doc["baselines"] = baselines;
    if (!result.stack.meta.epoch_loss.empty()) {
        doc["meta_learning_curve"] = {{"loss", result.stack.meta.epoch_loss},
                                      {"accuracy", result.stack.meta.epoch_accuracy}};
    }
    return doc.dump(2) + "\n";
}

std::string rerender_csv(const std::string& report_json_text) {
    json doc = json::parse(report_json_text);
    return csv_from_rows(doc.at("rows"));
}

std::string rerender_markdown(const std::string& report_json_text) {
    json doc = json::parse(report_json_text);
    std::string out = "## Evaluation results (percent)\n\n";
    out += markdown_from_rows(doc.at("rows"));
    return out;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace reliance::eval
