#include "reliance/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "reliance/errors.hpp"

namespace reliance::cli {
namespace {

using nlohmann::json;

// Fail fast on typos: every object's keys must be known.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void apply_profile(RunConfig& cfg) {
    auto& exp = cfg.experiment;
    if (cfg.profile == "desk") {
        exp.doc2vec.dim = 100;
        exp.doc2vec.epochs = 20;
        exp.subsample = 0.2;
        exp.stack.base.svm.cache_bytes = std::size_t(256) << 20;
    } else if (cfg.profile == "full") {
        exp.doc2vec.dim = 1200;
        exp.doc2vec.epochs = 50;
        exp.subsample = 1.0;
        exp.split.train_fraction = 0.8;
    } else if (cfg.profile != "custom") {
        throw ConfigError("unknown profile '" + cfg.profile + "'");
    }
}

void parse_into(const json& doc, RunConfig& cfg) {
    check_keys(doc,
               {"profile", "dataset", "output_dir", "stopwords", "seed", "threads",
                "transductive", "insample_meta", "subsample", "infer_steps",
                "bilstm_cv_folds", "doc2vec", "split", "meta", "logreg", "svm", "forest",
                "mnb", "bilstm", "synthetic"},
               "config");

    read_field(doc, "profile", cfg.profile);
    apply_profile(cfg);

    read_field(doc, "dataset", cfg.dataset);
    read_field(doc, "output_dir", cfg.output_dir);
    read_field(doc, "stopwords", cfg.stopwords);
    read_field(doc, "seed", cfg.seed);
    read_field(doc, "threads", cfg.threads);

    auto& exp = cfg.experiment;
    // The desk subsample trims the real corpus; the synthetic fallback is
    // already desk-sized.
    if (cfg.dataset.empty() && !doc.contains("subsample")) exp.subsample = 1.0;
    read_field(doc, "transductive", exp.transductive);
    read_field(doc, "insample_meta", exp.stack.insample);
    read_field(doc, "subsample", exp.subsample);
    read_field(doc, "infer_steps", exp.infer_steps);
    read_field(doc, "bilstm_cv_folds", exp.bilstm_cv_folds);

    if (doc.contains("doc2vec")) {
        const json& j = doc.at("doc2vec");
        check_keys(j, {"dim", "min_count", "epochs", "window", "negative", "initial_lr",
                       "min_lr"},
                   "doc2vec");
        read_field(j, "dim", exp.doc2vec.dim);
        read_field(j, "min_count", exp.doc2vec.min_count);
        read_field(j, "epochs", exp.doc2vec.epochs);
        read_field(j, "window", exp.doc2vec.window);
        read_field(j, "negative", exp.doc2vec.negative);
        read_field(j, "initial_lr", exp.doc2vec.initial_lr);
        read_field(j, "min_lr", exp.doc2vec.min_lr);
    }
    if (doc.contains("split")) {
        const json& j = doc.at("split");
        check_keys(j, {"train_fraction", "seed", "stratified"}, "split");
        read_field(j, "train_fraction", exp.split.train_fraction);
        read_field(j, "seed", exp.split.seed);
        read_field(j, "stratified", exp.split.stratified);
    }
    if (doc.contains("meta")) {
        const json& j = doc.at("meta");
        check_keys(j, {"folds", "epochs", "learning_rate", "alpha", "batch_size", "hidden"},
                   "meta");
        read_field(j, "folds", exp.stack.folds);
        read_field(j, "epochs", exp.stack.meta.epochs);
        read_field(j, "learning_rate", exp.stack.meta.learning_rate);
        read_field(j, "alpha", exp.stack.meta.alpha);
        read_field(j, "batch_size", exp.stack.meta.batch_size);
        read_field(j, "hidden", exp.stack.meta.hidden);
    }
    if (doc.contains("logreg")) {
        const json& j = doc.at("logreg");
        check_keys(j, {"l1_lambda", "max_iter", "tolerance"}, "logreg");
        read_field(j, "l1_lambda", exp.stack.base.logreg.l1_lambda);
        read_field(j, "max_iter", exp.stack.base.logreg.max_iter);
        read_field(j, "tolerance", exp.stack.base.logreg.tolerance);
    }
    if (doc.contains("svm")) {
        const json& j = doc.at("svm");
        check_keys(j, {"c", "gamma", "tolerance", "cache_bytes", "max_iter"}, "svm");
        read_field(j, "c", exp.stack.base.svm.c);
        read_field(j, "gamma", exp.stack.base.svm.gamma);
        read_field(j, "tolerance", exp.stack.base.svm.tolerance);
        read_field(j, "cache_bytes", exp.stack.base.svm.cache_bytes);
        read_field(j, "max_iter", exp.stack.base.svm.max_iter);
    }
    if (doc.contains("forest")) {
        const json& j = doc.at("forest");
        check_keys(j, {"trees", "min_samples_split"}, "forest");
        read_field(j, "trees", exp.stack.base.forest.trees);
        read_field(j, "min_samples_split", exp.stack.base.forest.min_samples_split);
    }
    if (doc.contains("mnb")) {
        const json& j = doc.at("mnb");
        check_keys(j, {"alpha"}, "mnb");
        read_field(j, "alpha", exp.stack.base.mnb_alpha);
    }
    if (doc.contains("bilstm")) {
        const json& j = doc.at("bilstm");
        check_keys(j,
                   {"max_seq_len", "max_epochs", "batch_size", "learning_rate", "dropout",
                    "patience", "val_fraction"},
                   "bilstm");
        read_field(j, "max_seq_len", exp.stack.base.bilstm.max_seq_len);
        read_field(j, "max_epochs", exp.stack.base.bilstm.max_epochs);
        read_field(j, "batch_size", exp.stack.base.bilstm.batch_size);
        read_field(j, "learning_rate", exp.stack.base.bilstm.learning_rate);
        read_field(j, "dropout", exp.stack.base.bilstm.dropout);
        read_field(j, "patience", exp.stack.base.bilstm.patience);
        read_field(j, "val_fraction", exp.stack.base.bilstm.val_fraction);
    }
    if (doc.contains("synthetic")) {
        const json& j = doc.at("synthetic");
        check_keys(j,
                   {"docs_per_topic", "min_tokens", "max_tokens", "topic_vocab",
                    "shared_vocab", "shared_fraction"},
                   "synthetic");
        read_field(j, "docs_per_topic", exp.synthetic.docs_per_topic);
        read_field(j, "min_tokens", exp.synthetic.min_tokens);
        read_field(j, "max_tokens", exp.synthetic.max_tokens);
        read_field(j, "topic_vocab", exp.synthetic.topic_vocab);
        read_field(j, "shared_vocab", exp.synthetic.shared_vocab);
        read_field(j, "shared_fraction", exp.synthetic.shared_fraction);
    }

    // The full profile pins the published training geometry.
    if (cfg.profile == "full") {
        if (exp.doc2vec.dim != 1200 || exp.doc2vec.epochs != 50 ||
            exp.split.train_fraction != 0.8)
            throw ConfigError(
                "profile 'full' locks doc2vec.dim=1200, doc2vec.epochs=50 and "
                "split.train_fraction=0.8");
    }

    if (exp.subsample <= 0.0 || exp.subsample > 1.0)
        throw ConfigError("subsample must lie in (0, 1]");
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
    if (exp.doc2vec.dim <= 0 || exp.doc2vec.epochs < 0 || exp.doc2vec.window < 1 ||
        exp.doc2vec.negative < 1)
        throw ConfigError("doc2vec settings out of range");

    exp.master_seed = cfg.seed;
    exp.threads = cfg.threads;
    exp.dataset_path = cfg.dataset;
    exp.stopwords_path = cfg.stopwords;
    if (!cfg.dataset.empty() && !std::filesystem::exists(cfg.dataset))
        throw ConfigError("dataset path does not exist: " + cfg.dataset);
    if (!cfg.dataset.empty() && !std::filesystem::exists(cfg.stopwords))
        throw ConfigError("stopword list does not exist: " + cfg.stopwords);
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    RunConfig cfg;
    parse_into(doc, cfg);
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string RunConfig::digest() const {
    const auto& exp = experiment;
    json doc;
    doc["profile"] = profile;
    doc["dataset"] = dataset;
    doc["stopwords"] = stopwords;
    doc["seed"] = seed;
    doc["threads"] = threads;
    doc["transductive"] = exp.transductive;
    doc["insample_meta"] = exp.stack.insample;
    doc["subsample"] = exp.subsample;
    doc["infer_steps"] = exp.infer_steps;
    doc["bilstm_cv_folds"] = exp.bilstm_cv_folds;
    doc["doc2vec"] = {{"dim", exp.doc2vec.dim},
                      {"min_count", exp.doc2vec.min_count},
                      {"epochs", exp.doc2vec.epochs},
                      {"window", exp.doc2vec.window},
                      {"negative", exp.doc2vec.negative},
                      {"initial_lr", exp.doc2vec.initial_lr},
                      {"min_lr", exp.doc2vec.min_lr}};
    doc["split"] = {{"train_fraction", exp.split.train_fraction},
                    {"seed", exp.split.seed},
                    {"stratified", exp.split.stratified}};
    doc["meta"] = {{"folds", exp.stack.folds},
                   {"epochs", exp.stack.meta.epochs},
                   {"learning_rate", exp.stack.meta.learning_rate},
                   {"alpha", exp.stack.meta.alpha},
                   {"batch_size", exp.stack.meta.batch_size},
                   {"hidden", exp.stack.meta.hidden}};
    doc["logreg"] = {{"l1_lambda", exp.stack.base.logreg.l1_lambda},
                     {"max_iter", exp.stack.base.logreg.max_iter},
                     {"tolerance", exp.stack.base.logreg.tolerance}};
    doc["svm"] = {{"c", exp.stack.base.svm.c},
                  {"gamma", exp.stack.base.svm.gamma},
                  {"tolerance", exp.stack.base.svm.tolerance},
                  {"cache_bytes", exp.stack.base.svm.cache_bytes},
                  {"max_iter", exp.stack.base.svm.max_iter}};
    doc["forest"] = {{"trees", exp.stack.base.forest.trees},
                     {"min_samples_split", exp.stack.base.forest.min_samples_split}};
    doc["mnb"] = {{"alpha", exp.stack.base.mnb_alpha}};
    doc["bilstm"] = {{"max_seq_len", exp.stack.base.bilstm.max_seq_len},
                     {"max_epochs", exp.stack.base.bilstm.max_epochs},
                     {"batch_size", exp.stack.base.bilstm.batch_size},
                     {"learning_rate", exp.stack.base.bilstm.learning_rate},
                     {"dropout", exp.stack.base.bilstm.dropout},
                     {"patience", exp.stack.base.bilstm.patience},
                     {"val_fraction", exp.stack.base.bilstm.val_fraction}};
    doc["synthetic"] = {{"docs_per_topic", exp.synthetic.docs_per_topic},
                        {"min_tokens", exp.synthetic.min_tokens},
                        {"max_tokens", exp.synthetic.max_tokens},
                        {"topic_vocab", exp.synthetic.topic_vocab},
                        {"shared_vocab", exp.synthetic.shared_vocab},
                        {"shared_fraction", exp.synthetic.shared_fraction}};

    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(doc.dump())));
    return buf;
}

}  // namespace reliance::cli
