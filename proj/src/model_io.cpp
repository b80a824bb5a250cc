#include "reliance/model_io.hpp"

#include "reliance/errors.hpp"

namespace reliance::cli {
namespace {

void put_matrix(BlobWriter& w, const nn::Matrix& m) {
    w.put_i64(m.rows());
    w.put_i64(m.cols());
    w.put_f64_array(m.values());
}

nn::Matrix get_matrix(BlobReader& r) {
    const std::int64_t rows = r.get_i64();
    const std::int64_t cols = r.get_i64();
    nn::Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    auto values = r.get_f64_array();
    if (values.size() != m.size()) throw BundleFormatError("matrix payload size mismatch");
    m.values() = std::move(values);
    return m;
}

void put_lstm_params(BlobWriter& w, const nn::LstmParams& p) {
    for (const nn::Matrix* m : p.parameters()) put_matrix(w, *m);
}

void get_lstm_params(BlobReader& r, nn::LstmParams& p) {
    for (nn::Matrix* m : p.parameters()) *m = get_matrix(r);
}

}  // namespace

std::vector<std::uint8_t> encode_doc2vec(const embed::Doc2VecModel& model) {
    BlobWriter w;
    w.put_i64(model.config.dim);
    w.put_i64(model.config.min_count);
    w.put_i64(model.config.epochs);
    w.put_i64(model.config.window);
    w.put_i64(model.config.negative);
    w.put_f64(model.config.initial_lr);
    w.put_f64(model.config.min_lr);
    w.put_u64(model.config.seed);

    w.put_u64(static_cast<std::uint64_t>(model.vocab.size()));
    for (int i = 0; i < model.vocab.size(); ++i) {
        w.put_string(model.vocab.token(i));
        w.put_i64(model.vocab.count(i));
    }
    w.put_i64_array(model.doc_ids);
    put_matrix(w, model.word_in);
    put_matrix(w, model.doc_vecs);
    put_matrix(w, model.word_out);
    return w.take();
}

embed::Doc2VecModel decode_doc2vec(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    embed::Doc2VecModel model;
    model.config.dim = static_cast<int>(r.get_i64());
    model.config.min_count = static_cast<int>(r.get_i64());
    model.config.epochs = static_cast<int>(r.get_i64());
    model.config.window = static_cast<int>(r.get_i64());
    model.config.negative = static_cast<int>(r.get_i64());
    model.config.initial_lr = r.get_f64();
    model.config.min_lr = r.get_f64();
    model.config.seed = r.get_u64();

    const std::uint64_t v = r.get_u64();
    std::vector<std::string> tokens;
    std::vector<std::int64_t> counts;
    tokens.reserve(v);
    counts.reserve(v);
    for (std::uint64_t i = 0; i < v; ++i) {
        tokens.push_back(r.get_string());
        counts.push_back(r.get_i64());
    }
    model.vocab = embed::Vocabulary(std::move(tokens), std::move(counts));
    model.table = embed::UnigramTable(model.vocab.counts());
    model.doc_ids = r.get_i64_array();
    for (std::size_t i = 0; i < model.doc_ids.size(); ++i)
        model.doc_row.emplace(model.doc_ids[i], static_cast<int>(i));
    model.word_in = get_matrix(r);
    model.doc_vecs = get_matrix(r);
    model.word_out = get_matrix(r);
    return model;
}

std::vector<std::uint8_t> encode_logreg(const models::LogRegModel& model) {
    BlobWriter w;
    w.put_f64(model.config.l1_lambda);
    w.put_i64(model.config.max_iter);
    w.put_f64(model.config.tolerance);
    w.put_i64(model.iterations);
    w.put_f64(model.bias);
    w.put_f64_array(model.weights);
    return w.take();
}

models::LogRegModel decode_logreg(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    models::LogRegModel model;
    model.config.l1_lambda = r.get_f64();
    model.config.max_iter = static_cast<int>(r.get_i64());
    model.config.tolerance = r.get_f64();
    model.iterations = static_cast<int>(r.get_i64());
    model.bias = r.get_f64();
    model.weights = r.get_f64_array();
    return model;
}

std::vector<std::uint8_t> encode_svm(const models::SvmModel& model) {
    BlobWriter w;
    w.put_f64(model.config.c);
    w.put_f64(model.config.gamma);
    w.put_f64(model.config.tolerance);
    w.put_u64(model.config.cache_bytes);
    w.put_i64(model.config.max_iter);
    w.put_f64(model.gamma);
    w.put_f64(model.bias);
    w.put_f64(model.platt_a);
    w.put_f64(model.platt_b);
    w.put_i64(model.smo_iterations);
    w.put_u8(model.converged ? 1 : 0);
    w.put_f64_array(model.coeffs);
    std::vector<std::int64_t> idx(model.sv_train_index.begin(), model.sv_train_index.end());
    w.put_i64_array(idx);
    put_matrix(w, model.support_vectors);
    return w.take();
}

models::SvmModel decode_svm(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    models::SvmModel model;
    model.config.c = r.get_f64();
    model.config.gamma = r.get_f64();
    model.config.tolerance = r.get_f64();
    model.config.cache_bytes = r.get_u64();
    model.config.max_iter = r.get_i64();
    model.gamma = r.get_f64();
    model.bias = r.get_f64();
    model.platt_a = r.get_f64();
    model.platt_b = r.get_f64();
    model.smo_iterations = r.get_i64();
    model.converged = r.get_u8() != 0;
    model.coeffs = r.get_f64_array();
    for (std::int64_t v : r.get_i64_array()) model.sv_train_index.push_back(static_cast<int>(v));
    model.support_vectors = get_matrix(r);
    return model;
}

std::vector<std::uint8_t> encode_forest(const models::ForestModel& model) {
    BlobWriter w;
    w.put_i64(model.config.trees);
    w.put_i64(model.config.min_samples_split);
    w.put_u64(model.config.seed);
    w.put_u64(model.trees.size());
    for (const auto& tree : model.trees) {
        w.put_u64(tree.nodes.size());
        for (const auto& node : tree.nodes) {
            w.put_i64(node.feature);
            w.put_f64(node.threshold);
            w.put_i64(node.left);
            w.put_i64(node.right);
            w.put_i64(node.label);
        }
    }
    return w.take();
}

models::ForestModel decode_forest(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    models::ForestModel model;
    model.config.trees = static_cast<int>(r.get_i64());
    model.config.min_samples_split = static_cast<int>(r.get_i64());
    model.config.seed = r.get_u64();
    const std::uint64_t n_trees = r.get_u64();
    model.trees.resize(n_trees);
    for (std::uint64_t t = 0; t < n_trees; ++t) {
        const std::uint64_t n_nodes = r.get_u64();
        auto& nodes = model.trees[t].nodes;
        nodes.resize(n_nodes);
        for (std::uint64_t i = 0; i < n_nodes; ++i) {
            nodes[i].feature = static_cast<int>(r.get_i64());
            nodes[i].threshold = r.get_f64();
            nodes[i].left = static_cast<int>(r.get_i64());
            nodes[i].right = static_cast<int>(r.get_i64());
            nodes[i].label = static_cast<int>(r.get_i64());
        }
    }
    return model;
}

std::vector<std::uint8_t> encode_mnb(const models::MnbModel& model) {
    BlobWriter w;
    w.put_f64(model.alpha);
    w.put_f64(model.log_prior[0]);
    w.put_f64(model.log_prior[1]);
    put_matrix(w, model.log_theta);
    w.put_f64_array(model.feat_min);
    w.put_f64_array(model.feat_max);
    return w.take();
}

models::MnbModel decode_mnb(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    models::MnbModel model;
    model.alpha = r.get_f64();
    model.log_prior[0] = r.get_f64();
    model.log_prior[1] = r.get_f64();
    model.log_theta = get_matrix(r);
    model.feat_min = r.get_f64_array();
    model.feat_max = r.get_f64_array();
    return model;
}

std::vector<std::uint8_t> encode_bilstm(const models::BiLstmModel& model) {
    BlobWriter w;
    w.put_u64(model.config.widths.size());
    for (int width : model.config.widths) w.put_i64(width);
    w.put_i64(model.config.dense_units);
    w.put_i64(model.config.max_seq_len);
    w.put_i64(model.config.max_epochs);
    w.put_i64(model.config.batch_size);
    w.put_f64(model.config.learning_rate);
    w.put_f64(model.config.dropout);
    w.put_i64(model.config.patience);
    w.put_f64(model.config.val_fraction);
    w.put_u64(model.config.seed);
    w.put_i64(model.log.best_epoch);
    w.put_i64(model.log.stopped_epoch);

    w.put_i64(model.net.input_size);
    w.put_u64(model.net.layers.size());
    for (const auto& layer : model.net.layers) {
        put_lstm_params(w, layer.fwd);
        put_lstm_params(w, layer.bwd);
    }
    put_matrix(w, model.net.dense_w);
    put_matrix(w, model.net.dense_b);
    put_matrix(w, model.net.out_w);
    put_matrix(w, model.net.out_b);
    return w.take();
}

models::BiLstmModel decode_bilstm(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    models::BiLstmModel model;
    const std::uint64_t n_widths = r.get_u64();
    model.config.widths.clear();
    for (std::uint64_t i = 0; i < n_widths; ++i)
        model.config.widths.push_back(static_cast<int>(r.get_i64()));
    model.config.dense_units = static_cast<int>(r.get_i64());
    model.config.max_seq_len = static_cast<int>(r.get_i64());
    model.config.max_epochs = static_cast<int>(r.get_i64());
    model.config.batch_size = static_cast<int>(r.get_i64());
    model.config.learning_rate = r.get_f64();
    model.config.dropout = r.get_f64();
    model.config.patience = static_cast<int>(r.get_i64());
    model.config.val_fraction = r.get_f64();
    model.config.seed = r.get_u64();
    model.log.best_epoch = static_cast<int>(r.get_i64());
    model.log.stopped_epoch = static_cast<int>(r.get_i64());

    model.net.input_size = static_cast<int>(r.get_i64());
    const std::uint64_t n_layers = r.get_u64();
    model.net.layers.resize(n_layers);
    for (std::uint64_t l = 0; l < n_layers; ++l) {
        get_lstm_params(r, model.net.layers[l].fwd);
        get_lstm_params(r, model.net.layers[l].bwd);
    }
    model.net.dense_w = get_matrix(r);
    model.net.dense_b = get_matrix(r);
    model.net.out_w = get_matrix(r);
    model.net.out_b = get_matrix(r);
    return model;
}

std::vector<std::uint8_t> encode_mlp(const nn::MlpModel& model) {
    BlobWriter w;
    w.put_u64(model.config.hidden.size());
    for (int h : model.config.hidden) w.put_i64(h);
    w.put_f64(model.config.alpha);
    w.put_i64(model.config.epochs);
    w.put_f64(model.config.learning_rate);
    w.put_i64(model.config.batch_size);
    w.put_u64(model.weights.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        put_matrix(w, model.weights[l]);
        put_matrix(w, model.biases[l]);
    }
    return w.take();
}

nn::MlpModel decode_mlp(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    nn::MlpModel model;
    const std::uint64_t n_hidden = r.get_u64();
    model.config.hidden.clear();
    for (std::uint64_t i = 0; i < n_hidden; ++i)
        model.config.hidden.push_back(static_cast<int>(r.get_i64()));
    model.config.alpha = r.get_f64();
    model.config.epochs = static_cast<int>(r.get_i64());
    model.config.learning_rate = r.get_f64();
    model.config.batch_size = static_cast<int>(r.get_i64());
    const std::uint64_t n_layers = r.get_u64();
    for (std::uint64_t l = 0; l < n_layers; ++l) {
        model.weights.push_back(get_matrix(r));
        model.biases.push_back(get_matrix(r));
    }
    return model;
}

std::vector<std::uint8_t> encode_stopwords(const corpus::StopwordList& stopwords) {
    BlobWriter w;
    const auto entries = stopwords.sorted_entries();
    w.put_u64(entries.size());
    for (const auto& e : entries) w.put_string(e);
    return w.take();
}

corpus::StopwordList decode_stopwords(std::span<const std::uint8_t> bytes) {
    BlobReader r(bytes);
    const std::uint64_t n = r.get_u64();
    std::vector<std::string> words;
    words.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) words.push_back(r.get_string());
    return corpus::StopwordList(std::move(words));
}

Bundle make_stack_bundle(const embed::Doc2VecModel& doc2vec,
                         const ensemble::StackingModel& stack,
                         const corpus::StopwordList& stopwords,
                         const std::string& config_digest, const std::string& created_at) {
    Bundle bundle;
    bundle.created_at = created_at;
    bundle.config_digest = config_digest;
    {
        std::string order;
        for (auto kind : models::kBaseModelOrder) {
            if (!order.empty()) order += ',';
            order += models::kind_name(kind);
        }
        bundle.extra["column_order"] = order;
    }
    bundle.components.push_back({"doc2vec", encode_doc2vec(doc2vec)});
    // Component order mirrors the meta-feature column order.
    bundle.components.push_back({"base.bilstm", encode_bilstm(stack.base.bilstm)});
    bundle.components.push_back({"base.logreg", encode_logreg(stack.base.logreg)});
    bundle.components.push_back({"base.svm", encode_svm(stack.base.svm)});
    bundle.components.push_back({"base.forest", encode_forest(stack.base.forest)});
    bundle.components.push_back({"base.mnb", encode_mnb(stack.base.mnb)});
    bundle.components.push_back({"meta.mlp", encode_mlp(stack.meta)});
    bundle.components.push_back({"stopwords", encode_stopwords(stopwords)});
    return bundle;
}

LoadedStack load_stack_bundle(const Bundle& bundle) {
    if (auto it = bundle.extra.find("column_order"); it != bundle.extra.end()) {
        std::string expected;
        for (auto kind : models::kBaseModelOrder) {
            if (!expected.empty()) expected += ',';
            expected += models::kind_name(kind);
        }
        if (it->second != expected)
            throw BundleFormatError("bundle column order '" + it->second +
                                    "' does not match this build");
    }
    LoadedStack loaded;
    loaded.doc2vec = decode_doc2vec(bundle.require("doc2vec").payload);
    loaded.stack.base.bilstm = decode_bilstm(bundle.require("base.bilstm").payload);
    loaded.stack.base.logreg = decode_logreg(bundle.require("base.logreg").payload);
    loaded.stack.base.svm = decode_svm(bundle.require("base.svm").payload);
    loaded.stack.base.forest = decode_forest(bundle.require("base.forest").payload);
    loaded.stack.base.mnb = decode_mnb(bundle.require("base.mnb").payload);
    loaded.stack.meta = decode_mlp(bundle.require("meta.mlp").payload);
    loaded.stopwords = decode_stopwords(bundle.require("stopwords").payload);
    return loaded;
}

}  // namespace reliance::cli
