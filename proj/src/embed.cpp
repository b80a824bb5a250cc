#include "reliance/embed.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "reliance/errors.hpp"

namespace reliance::embed {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log sigmoid(x), stable for large negative x
inline double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

std::vector<int> to_indices(const corpus::Document& doc, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens) {
        const int idx = vocab.index_of(t);
        if (idx >= 0) ids.push_back(idx);
    }
    return ids;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::int64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        index_.emplace(tokens_[i], static_cast<int>(i));
        total_ += counts_[i];
    }
}

int Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

Vocabulary build_vocab(const std::vector<corpus::Document>& docs, int min_count) {
    if (docs.empty()) throw EmptyCorpusError("build_vocab: empty corpus");
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& d : docs)
        for (const auto& t : d.tokens) counts[t]++;

    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (auto& [tok, cnt] : counts)
        if (cnt >= min_count) kept.emplace_back(tok, cnt);
    if (kept.empty()) throw EmptyCorpusError("build_vocab: no token reaches min_count");

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> tokens;
    std::vector<std::int64_t> kept_counts;
    tokens.reserve(kept.size());
    kept_counts.reserve(kept.size());
    for (auto& [tok, cnt] : kept) {
        tokens.push_back(std::move(tok));
        kept_counts.push_back(cnt);
    }
    return Vocabulary(std::move(tokens), std::move(kept_counts));
}

UnigramTable::UnigramTable(const std::vector<std::int64_t>& counts, double power) {
    const std::size_t n = counts.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> weights(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::pow(static_cast<double>(counts[i]), power);
        total += weights[i];
    }
    // Walker alias construction; stacks filled in index order for determinism.
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] / total * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        const std::size_t s = small.back();
        small.pop_back();
        const std::size_t l = large.back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = static_cast<int>(l);
        scaled[l] = scaled[l] + scaled[s] - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::size_t s : small) prob_[s] = 1.0;
    for (std::size_t l : large) prob_[l] = 1.0;
}

std::span<const double> Doc2VecModel::doc_vector(std::int64_t id) const {
    auto it = doc_row.find(id);
    if (it == doc_row.end())
        throw UnknownDocumentError("document " + std::to_string(id) + " was not trained");
    return doc_vecs.row_span(it->second);
}

double ns_objective(std::span<const double> hidden, const nn::Matrix& word_out, int target,
                    std::span<const int> negatives) {
    double obj = log_sigmoid(nn::dot(hidden, word_out.row_span(target)));
    for (int n : negatives) obj += log_sigmoid(-nn::dot(hidden, word_out.row_span(n)));
    return obj;
}

void ns_gradients(std::span<const double> hidden, const nn::Matrix& word_out, int target,
                  std::span<const int> negatives, std::span<double> grad_hidden,
                  nn::Matrix& grad_word_out) {
    std::fill(grad_hidden.begin(), grad_hidden.end(), 0.0);
    const double gt = 1.0 - sigmoid(nn::dot(hidden, word_out.row_span(target)));
    nn::axpy(gt, word_out.row_span(target), grad_hidden);
    nn::axpy(gt, hidden, grad_word_out.row_span(target));
    for (int n : negatives) {
        const double gn = -sigmoid(nn::dot(hidden, word_out.row_span(n)));
        nn::axpy(gn, word_out.row_span(n), grad_hidden);
        nn::axpy(gn, hidden, grad_word_out.row_span(n));
    }
}

namespace {

struct TrainContext {
    Doc2VecModel* model;
    const std::vector<std::vector<int>>* doc_tokens;
    std::int64_t total_positions = 0;  // across all epochs
};

// Core SGD pass over one document for one epoch. When doc_override is given
// (inference) only that vector is updated and word matrices stay frozen.
double train_document(TrainContext& ctx, int doc_index, std::span<double> doc_vec, Rng& rng,
                      std::int64_t& processed, bool freeze_words) {
    Doc2VecModel& m = *ctx.model;
    const auto& tokens = (*ctx.doc_tokens)[static_cast<std::size_t>(doc_index)];
    const int len = static_cast<int>(tokens.size());
    const int dim = m.config.dim;
    const int window = m.config.window;

    std::vector<double> hidden(static_cast<std::size_t>(dim));
    std::vector<double> hidden_err(static_cast<std::size_t>(dim));
    double objective = 0.0;

    for (int t = 0; t < len; ++t) {
        const double progress =
            static_cast<double>(processed) / static_cast<double>(ctx.total_positions);
        const double lr = std::max(m.config.min_lr, m.config.initial_lr * (1.0 - progress));
        ++processed;

        const int lo = std::max(0, t - window);
        const int hi = std::min(len - 1, t + window);

        std::copy(doc_vec.begin(), doc_vec.end(), hidden.begin());
        int contributors = 1;
        for (int cpos = lo; cpos <= hi; ++cpos) {
            if (cpos == t) continue;
            nn::axpy(1.0, m.word_in.row_span(tokens[static_cast<std::size_t>(cpos)]), hidden);
            ++contributors;
        }
        const double inv = 1.0 / static_cast<double>(contributors);
        for (double& v : hidden) v *= inv;

        std::fill(hidden_err.begin(), hidden_err.end(), 0.0);
        const int target = tokens[static_cast<std::size_t>(t)];

        // positive sample
        {
            std::span<double> u = m.word_out.row_span(target);
            const double score = nn::dot(hidden, u);
            const double f = sigmoid(score);
            objective += log_sigmoid(score);
            const double g = (1.0 - f) * lr;
            nn::axpy(g, u, hidden_err);
            if (!freeze_words) nn::axpy(g, hidden, u);
        }
        // negatives
        for (int k = 0; k < m.config.negative; ++k) {
            const int neg = m.table.sample(rng);
            if (neg == target) continue;
            std::span<double> u = m.word_out.row_span(neg);
            const double score = nn::dot(hidden, u);
            const double f = sigmoid(score);
            objective += log_sigmoid(-score);
            const double g = -f * lr;
            nn::axpy(g, u, hidden_err);
            if (!freeze_words) nn::axpy(g, hidden, u);
        }

        // exact mean-combination gradient: each contributor owns 1/n of h
        nn::axpy(inv, hidden_err, doc_vec);
        if (!freeze_words)
            for (int cpos = lo; cpos <= hi; ++cpos) {
                if (cpos == t) continue;
                nn::axpy(inv, hidden_err,
                         m.word_in.row_span(tokens[static_cast<std::size_t>(cpos)]));
            }
    }
    return objective;
}

}  // namespace

Doc2VecModel train_doc2vec(const std::vector<corpus::Document>& docs,
                           const Doc2VecConfig& config, int threads) {
    if (docs.empty()) throw EmptyCorpusError("train_doc2vec: empty corpus");

    Doc2VecModel model;
    model.config = config;
    model.vocab = build_vocab(docs, config.min_count);
    model.table = UnigramTable(model.vocab.counts());

    const int n = static_cast<int>(docs.size());
    const int dim = config.dim;
    const int v = model.vocab.size();

    model.word_in = nn::Matrix(v, dim);
    model.doc_vecs = nn::Matrix(n, dim);
    model.word_out = nn::Matrix(v, dim);  // stays zero at init
    Rng init_rng(derive_seed(config.seed, 0));
    const double half = 0.5 / static_cast<double>(dim);
    for (double& x : model.word_in.values()) x = init_rng.next_double(-half, half);
    for (double& x : model.doc_vecs.values()) x = init_rng.next_double(-half, half);

    model.doc_ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        model.doc_ids.push_back(docs[static_cast<std::size_t>(i)].id);
        model.doc_row.emplace(docs[static_cast<std::size_t>(i)].id, i);
    }

    std::vector<std::vector<int>> doc_tokens;
    doc_tokens.reserve(static_cast<std::size_t>(n));
    std::int64_t positions_per_epoch = 0;
    for (const auto& d : docs) {
        doc_tokens.push_back(to_indices(d, model.vocab));
        positions_per_epoch += static_cast<std::int64_t>(doc_tokens.back().size());
    }

    TrainContext ctx;
    ctx.model = &model;
    ctx.doc_tokens = &doc_tokens;
    ctx.total_positions = positions_per_epoch * config.epochs;
    if (ctx.total_positions == 0) {
        model.epoch_objective.assign(static_cast<std::size_t>(config.epochs), 0.0);
        return model;  // nothing to train on
    }

    if (threads <= 1) {
        Rng rng(derive_seed(config.seed, 1));
        std::int64_t processed = 0;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            double obj = 0.0;
            for (int d = 0; d < n; ++d)
                obj += train_document(ctx, d, model.doc_vecs.row_span(d), rng, processed, false);
            model.epoch_objective.push_back(obj / static_cast<double>(positions_per_epoch));
            if (!std::isfinite(model.epoch_objective.back()))
                throw NumericOverflowError("train_doc2vec: objective diverged");
        }
    } else {
        // Hogwild-style: workers update shared matrices without locks.
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            std::vector<std::thread> pool;
            std::vector<double> objs(static_cast<std::size_t>(threads), 0.0);
            for (int w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    Rng rng(derive_seed(config.seed, 100 + static_cast<std::uint64_t>(w),
                                        static_cast<std::uint64_t>(epoch)));
                    std::int64_t processed =
                        positions_per_epoch / threads * (static_cast<std::int64_t>(epoch));
                    for (int d = w; d < n; d += threads)
                        objs[static_cast<std::size_t>(w)] += train_document(
                            ctx, d, model.doc_vecs.row_span(d), rng, processed, false);
                });
            }
            for (auto& th : pool) th.join();
            double obj = 0.0;
            for (double o : objs) obj += o;
            model.epoch_objective.push_back(obj / static_cast<double>(positions_per_epoch));
        }
    }

    if (!model.word_in.all_finite() || !model.doc_vecs.all_finite() ||
        !model.word_out.all_finite())
        throw NumericOverflowError("train_doc2vec: non-finite parameters after training");
    return model;
}

std::vector<double> infer_vector(const Doc2VecModel& model,
                                 const std::vector<std::string>& tokens, int steps,
                                 std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("infer_vector: steps must be >= 1");

    const int dim = model.config.dim;
    Rng rng(derive_seed(seed, 7));
    std::vector<double> vec(static_cast<std::size_t>(dim));
    const double half = 0.5 / static_cast<double>(dim);
    for (double& x : vec) x = rng.next_double(-half, half);

    corpus::Document tmp;
    tmp.tokens = tokens;
    std::vector<std::vector<int>> doc_tokens{to_indices(tmp, model.vocab)};
    if (doc_tokens[0].empty()) return vec;

    TrainContext ctx;
    ctx.model = const_cast<Doc2VecModel*>(&model);  // freeze_words guards all writes
    ctx.doc_tokens = &doc_tokens;
    ctx.total_positions = static_cast<std::int64_t>(doc_tokens[0].size()) * steps;

    std::int64_t processed = 0;
    for (int s = 0; s < steps; ++s) train_document(ctx, 0, vec, rng, processed, true);
    return vec;
}

nn::Matrix embed_corpus(const Doc2VecModel& model, const std::vector<corpus::Document>& docs) {
    nn::Matrix out(static_cast<int>(docs.size()), model.config.dim);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto row = model.doc_vector(docs[i].id);
        std::copy(row.begin(), row.end(), out.row(static_cast<int>(i)));
    }
    return out;
}

void l2_normalize(std::span<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s <= 0.0) return;
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : v) x *= inv;
}

void l2_normalize_rows(nn::Matrix& m) {
    for (int r = 0; r < m.rows(); ++r) l2_normalize(m.row_span(r));
}

}  // namespace reliance::embed
