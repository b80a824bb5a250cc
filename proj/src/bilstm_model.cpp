#include <algorithm>
#include <cmath>

#include "reliance/base_models.hpp"
#include "reliance/errors.hpp"
#include "reliance/nn.hpp"

namespace reliance::models {
namespace {

// Per-sample forward state kept for backprop.
struct NetTrace {
    std::vector<nn::BiLstmTrace> traces;
    std::vector<nn::Matrix> outputs;  // masked outputs per layer (T x width)
    std::vector<nn::Matrix> masks;    // dropout masks (empty when not training)
    std::vector<double> pooled;
    std::vector<double> dense;  // tanh activations
    std::array<double, 2> probs{};
};

nn::SeqView rows_view(const nn::Matrix& m) {
    nn::SeqView v;
    v.reserve(static_cast<std::size_t>(m.rows()));
    for (int t = 0; t < m.rows(); ++t) v.push_back(m.row_span(t));
    return v;
}

std::array<double, 2> forward_net(const BiLstmNet& net, const nn::SeqView& xs_in, double dropout,
                                  Rng* drop_rng, NetTrace* trace,
                                  std::vector<double>* zero_step) {
    nn::SeqView xs = xs_in;
    if (xs.empty()) {
        zero_step->assign(static_cast<std::size_t>(net.input_size), 0.0);
        xs.push_back(*zero_step);
    }
    const int steps = static_cast<int>(xs.size());

    NetTrace local;
    NetTrace& tr = trace ? *trace : local;
    tr.traces.resize(net.layers.size());
    tr.outputs.resize(net.layers.size());
    tr.masks.resize(net.layers.size());

    nn::SeqView cur = xs;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        tr.outputs[l] = nn::bilstm_forward(net.layers[l], cur, tr.traces[l]);
        if (drop_rng && dropout > 0.0) {
            tr.masks[l] = nn::Matrix(steps, tr.outputs[l].cols());
            const double keep = 1.0 - dropout;
            double* mask = tr.masks[l].data();
            double* out = tr.outputs[l].data();
            for (std::size_t i = 0; i < tr.outputs[l].size(); ++i) {
                mask[i] = drop_rng->next_double() < dropout ? 0.0 : 1.0 / keep;
                out[i] *= mask[i];
            }
        }
        cur = rows_view(tr.outputs[l]);
    }

    const int last_width = tr.outputs.back().cols();
    tr.pooled.assign(static_cast<std::size_t>(last_width), 0.0);
    for (int t = 0; t < steps; ++t) nn::axpy(1.0, tr.outputs.back().row_span(t), tr.pooled);
    const double inv_t = 1.0 / static_cast<double>(steps);
    for (double& v : tr.pooled) v *= inv_t;

    tr.dense.assign(static_cast<std::size_t>(net.dense_w.rows()), 0.0);
    nn::matvec(net.dense_w, tr.pooled, tr.dense);
    for (std::size_t i = 0; i < tr.dense.size(); ++i)
        tr.dense[i] = std::tanh(tr.dense[i] + net.dense_b.data()[i]);

    std::vector<double> logits(2, 0.0);
    nn::matvec(net.out_w, tr.dense, logits);
    logits[0] += net.out_b.data()[0];
    logits[1] += net.out_b.data()[1];
    nn::softmax_inplace(logits);
    tr.probs = {logits[0], logits[1]};
    return tr.probs;
}

// Gradient layout: per layer fwd params (12), bwd params (12), then
// dense_w, dense_b, out_w, out_b.
double backprop_one(const BiLstmNet& net, const nn::SeqView& xs_in, int label, double dropout,
                    Rng* drop_rng, std::vector<nn::Matrix>& grads) {
    std::vector<double> zero_step;
    NetTrace tr;
    forward_net(net, xs_in, dropout, drop_rng, &tr, &zero_step);

    nn::SeqView xs = xs_in;
    if (xs.empty()) xs.push_back(zero_step);
    const int steps = static_cast<int>(xs.size());

    std::span<const double> probs(tr.probs.data(), 2);
    nn::CrossEntropy ce = nn::cross_entropy_loss(probs, label);

    const std::size_t n_layers = net.layers.size();
    const std::size_t g_dense_w = n_layers * 24;
    // output head
    nn::rank1_update(grads[g_dense_w + 2], 1.0, ce.grad_logits, tr.dense);
    nn::axpy(1.0, ce.grad_logits, grads[g_dense_w + 3].row_span(0));
    std::vector<double> d_dense(tr.dense.size(), 0.0);
    nn::matvec_transpose_add(net.out_w, ce.grad_logits, d_dense);
    for (std::size_t i = 0; i < d_dense.size(); ++i)
        d_dense[i] *= 1.0 - tr.dense[i] * tr.dense[i];
    nn::rank1_update(grads[g_dense_w], 1.0, d_dense, tr.pooled);
    nn::axpy(1.0, d_dense, grads[g_dense_w + 1].row_span(0));
    std::vector<double> d_pooled(tr.pooled.size(), 0.0);
    nn::matvec_transpose_add(net.dense_w, d_dense, d_pooled);

    // mean pool spreads the gradient evenly across timesteps
    nn::Matrix d_out(steps, static_cast<int>(d_pooled.size()));
    const double inv_t = 1.0 / static_cast<double>(steps);
    for (int t = 0; t < steps; ++t) {
        double* row = d_out.row(t);
        for (std::size_t i = 0; i < d_pooled.size(); ++i) row[i] = d_pooled[i] * inv_t;
    }

    // Each layer's 24 gradient accumulators are borrowed from the flat grads
    // vector for the duration of its backward pass.
    auto swap_layer_grads = [&grads](nn::BiLstmGrads& lg, std::size_t ul) {
        auto fwd = lg.fwd.g.parameters();
        auto bwd = lg.bwd.g.parameters();
        for (std::size_t k = 0; k < 12; ++k) {
            std::swap(*fwd[k], grads[ul * 24 + k]);
            std::swap(*bwd[k], grads[ul * 24 + 12 + k]);
        }
    };

    for (int l = static_cast<int>(n_layers) - 1; l >= 0; --l) {
        const std::size_t ul = static_cast<std::size_t>(l);
        if (!tr.masks[ul].values().empty()) {
            double* d = d_out.data();
            const double* mask = tr.masks[ul].data();
            for (std::size_t i = 0; i < d_out.size(); ++i) d[i] *= mask[i];
        }
        nn::SeqView input = l == 0 ? xs : rows_view(tr.outputs[ul - 1]);

        nn::BiLstmGrads layer_grads;
        swap_layer_grads(layer_grads, ul);
        if (l > 0) {
            nn::Matrix dx(steps, tr.outputs[ul - 1].cols());
            nn::bilstm_backward(net.layers[ul], input, tr.traces[ul], d_out, layer_grads, &dx);
            d_out = std::move(dx);
        } else {
            nn::bilstm_backward(net.layers[ul], input, tr.traces[ul], d_out, layer_grads,
                                nullptr);
        }
        swap_layer_grads(layer_grads, ul);
    }
    return ce.loss;
}

}  // namespace

BiLstmNet BiLstmNet::create(int input_size, const std::vector<int>& widths, int dense_units,
                            std::uint64_t seed) {
    BiLstmNet net;
    net.input_size = input_size;
    Rng seeder(seed);
    int in = input_size;
    for (int w : widths) {
        net.layers.push_back(nn::BiLstmParams::create(in, w, seeder.next_u64()));
        in = 2 * w;
    }
    net.dense_w = nn::Matrix(dense_units, in);
    nn::glorot_init(net.dense_w, in, dense_units, seeder.next_u64());
    net.dense_b = nn::Matrix(1, dense_units);
    net.out_w = nn::Matrix(2, dense_units);
    nn::glorot_init(net.out_w, dense_units, 2, seeder.next_u64());
    net.out_b = nn::Matrix(1, 2);
    return net;
}

std::vector<nn::Matrix*> BiLstmNet::parameters() {
    std::vector<nn::Matrix*> out;
    for (auto& layer : layers) {
        for (nn::Matrix* m : layer.fwd.parameters()) out.push_back(m);
        for (nn::Matrix* m : layer.bwd.parameters()) out.push_back(m);
    }
    out.push_back(&dense_w);
    out.push_back(&dense_b);
    out.push_back(&out_w);
    out.push_back(&out_b);
    return out;
}

std::vector<const nn::Matrix*> BiLstmNet::parameters() const {
    std::vector<const nn::Matrix*> out;
    for (const auto& layer : layers) {
        for (const nn::Matrix* m : layer.fwd.parameters()) out.push_back(m);
        for (const nn::Matrix* m : layer.bwd.parameters()) out.push_back(m);
    }
    out.push_back(&dense_w);
    out.push_back(&dense_b);
    out.push_back(&out_w);
    out.push_back(&out_b);
    return out;
}

std::array<double, 2> BiLstmNet::forward(const nn::SeqView& xs) const {
    std::vector<double> zero_step;
    return forward_net(*this, xs, 0.0, nullptr, nullptr, &zero_step);
}

double bilstm_net_loss(const BiLstmNet& net, const std::vector<nn::SeqView>& xs,
                       const std::vector<int>& labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        auto probs = net.forward(xs[i]);
        loss += nn::cross_entropy_loss(std::span<const double>(probs.data(), 2),
                                       labels[i])
                    .loss;
    }
    return loss / static_cast<double>(xs.size());
}

double bilstm_net_gradients(const BiLstmNet& net, const std::vector<nn::SeqView>& xs,
                            const std::vector<int>& labels, double dropout, Rng* drop_rng,
                            std::vector<nn::Matrix>& grads) {
    const auto params = const_cast<BiLstmNet&>(net).parameters();
    if (grads.size() != params.size()) {
        grads.clear();
        for (nn::Matrix* p : params) grads.emplace_back(p->rows(), p->cols());
    } else {
        for (auto& g : grads) g.fill(0.0);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        loss += backprop_one(net, xs[i], labels[i], dropout, drop_rng, grads);
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& g : grads)
        for (double& v : g.values()) v *= inv;
    return loss * inv;
}

BiLstmModel train_bilstm(const std::vector<nn::SeqView>& sequences,
                         const std::vector<int>& labels, int input_size,
                         const BiLstmConfig& config) {
    const int n = static_cast<int>(sequences.size());
    if (n == 0) throw EmptyInputError("train_bilstm: empty training set");
    if (labels.size() != sequences.size())
        throw ShapeMismatchError("train_bilstm: label count does not match sequences");
    if (config.val_fraction <= 0.0 || config.val_fraction >= 1.0)
        throw ConfigError("train_bilstm: val_fraction must lie in (0, 1)");

    BiLstmModel model;
    model.config = config;
    model.net = BiLstmNet::create(input_size, config.widths, config.dense_units,
                                  derive_seed(config.seed, 0));

    // Stratified validation slice.
    std::vector<int> train_idx, val_idx;
    {
        std::array<std::vector<int>, 2> by_class;
        for (int i = 0; i < n; ++i)
            by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
        Rng rng(derive_seed(config.seed, 1));
        for (auto& cls : by_class) {
            rng.shuffle(cls);
            std::size_t n_val = cls.size() >= 2
                                    ? std::max<std::size_t>(
                                          1, static_cast<std::size_t>(
                                                 config.val_fraction *
                                                 static_cast<double>(cls.size())))
                                    : 0;
            for (std::size_t i = 0; i < cls.size(); ++i)
                (i < n_val ? val_idx : train_idx).push_back(cls[i]);
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
    }
    if (train_idx.empty()) {
        train_idx = val_idx;  // degenerate tiny input; train on everything
        val_idx.clear();
    }

    auto params = model.net.parameters();
    std::vector<nn::AdamState> states;
    for (nn::Matrix* p : params) states.push_back(nn::AdamState::like(*p));
    std::vector<nn::Matrix> grads;

    Rng shuffle_rng(derive_seed(config.seed, 2));
    Rng drop_rng(derive_seed(config.seed, 3));

    std::vector<nn::Matrix> best_params;
    double best_acc = -1.0;
    int since_best = 0;

    auto validation_accuracy = [&]() {
        int correct = 0;
        for (int i : val_idx) {
            const auto probs = model.net.forward(sequences[static_cast<std::size_t>(i)]);
            const int pred = probs[1] >= 0.5 ? 1 : 0;
            if (pred == labels[static_cast<std::size_t>(i)]) ++correct;
        }
        return val_idx.empty() ? 0.0
                               : static_cast<double>(correct) /
                                     static_cast<double>(val_idx.size());
    };

    std::vector<nn::SeqView> batch_xs;
    std::vector<int> batch_y;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(train_idx);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
            batch_xs.clear();
            batch_y.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_xs.push_back(sequences[static_cast<std::size_t>(train_idx[i])]);
                batch_y.push_back(labels[static_cast<std::size_t>(train_idx[i])]);
            }
            epoch_loss += bilstm_net_gradients(model.net, batch_xs, batch_y, config.dropout,
                                               &drop_rng, grads);
            ++batches;
            for (std::size_t p = 0; p < params.size(); ++p)
                nn::adam_step(*params[p], grads[p], states[p], config.learning_rate);
        }
        epoch_loss /= std::max(1, batches);
        if (!std::isfinite(epoch_loss))
            throw NumericOverflowError("train_bilstm: loss diverged");
        model.log.train_loss.push_back(epoch_loss);

        if (val_idx.empty()) {
            model.log.best_epoch = epoch;
            model.log.stopped_epoch = epoch;
            continue;
        }
        const double acc = validation_accuracy();
        model.log.val_accuracy.push_back(acc);
        model.log.stopped_epoch = epoch;
        if (acc > best_acc) {
            best_acc = acc;
            model.log.best_epoch = epoch;
            since_best = 0;
            best_params.clear();
            for (nn::Matrix* p : params) best_params.push_back(*p);
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    if (!best_params.empty())
        for (std::size_t p = 0; p < params.size(); ++p) *params[p] = std::move(best_params[p]);
    return model;
}

double bilstm_score(const BiLstmModel& model, const nn::SeqView& xs) {
    if (model.net.layers.empty()) throw UntrainedModelError("bilstm_score: model not trained");
    return model.net.forward(xs)[1];
}

double score(BaseModelKind kind, const BaseModelSet& models, const PredictInput& input) {
    switch (kind) {
        case BaseModelKind::BiLstm: return bilstm_score(models.bilstm, input.sequence);
        case BaseModelKind::LogReg: return logreg_score(models.logreg, input.features);
        case BaseModelKind::Svm: return svm_score(models.svm, input.features);
        case BaseModelKind::RandomForest: return forest_score(models.forest, input.features);
        case BaseModelKind::NaiveBayes: return mnb_score(models.mnb, input.features);
    }
    throw UntrainedModelError("score: unknown model kind");
}

}  // namespace reliance::models
