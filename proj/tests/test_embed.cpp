#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "reliance/embed.hpp"
#include "reliance/errors.hpp"

using namespace reliance;
using namespace reliance::embed;
using test_helpers::cosine;
using test_helpers::rel_err;

namespace {

corpus::Document make_doc(std::int64_t id, std::vector<std::string> tokens, int label) {
    corpus::Document d;
    d.id = id;
    d.tokens = std::move(tokens);
    d.label = label;
    return d;
}

std::vector<corpus::Document> disjoint_two_topic(int docs_per_topic, std::uint64_t seed) {
    corpus::SyntheticSpec spec;
    spec.docs_per_topic = docs_per_topic;
    spec.shared_fraction = 0.0;
    return corpus::synthetic_corpus(spec, seed);
}

}  // namespace

TEST_CASE("build_vocab: counts, ordering, min_count") {
    auto docs = std::vector<corpus::Document>{make_doc(0, {"a", "b", "a"}, 0)};
    Vocabulary v = build_vocab(docs, 1);
    CHECK(v.size() == 2);
    CHECK(v.index_of("a") == 0);
    CHECK(v.count(0) == 2);
    CHECK(v.index_of("b") == 1);
    CHECK(v.count(1) == 1);

    Vocabulary v2 = build_vocab(docs, 2);
    CHECK(v2.size() == 1);
    CHECK(v2.index_of("a") == 0);
    CHECK(v2.index_of("b") == -1);

    CHECK_THROWS_AS(build_vocab({}, 1), EmptyCorpusError);
}

TEST_CASE("build_vocab: ties break lexicographically") {
    auto docs = std::vector<corpus::Document>{make_doc(0, {"zeta", "beta", "alpha"}, 0)};
    Vocabulary v = build_vocab(docs, 1);
    CHECK(v.index_of("alpha") == 0);
    CHECK(v.index_of("beta") == 1);
    CHECK(v.index_of("zeta") == 2);
}

TEST_CASE("negative-sampling gradients match finite differences") {
    Rng rng(21);
    const int dim = 6, vocab = 8;
    nn::Matrix out(vocab, dim);
    for (double& v : out.values()) v = rng.next_double(-1, 1);
    std::vector<double> hidden(dim);
    for (double& v : hidden) v = rng.next_double(-1, 1);
    std::vector<int> negs{1, 3, 3, 5};  // a repeat on purpose
    const int target = 0;

    std::vector<double> grad_h(dim);
    nn::Matrix grad_out(vocab, dim);
    ns_gradients(hidden, out, target, negs, grad_h, grad_out);

    const double eps = 1e-6;
    for (int i = 0; i < dim; ++i) {
        const double orig = hidden[static_cast<std::size_t>(i)];
        hidden[static_cast<std::size_t>(i)] = orig + eps;
        const double up = ns_objective(hidden, out, target, negs);
        hidden[static_cast<std::size_t>(i)] = orig - eps;
        const double down = ns_objective(hidden, out, target, negs);
        hidden[static_cast<std::size_t>(i)] = orig;
        CHECK(rel_err(grad_h[static_cast<std::size_t>(i)], (up - down) / (2 * eps)) < 1e-5);
    }
    for (int w : {0, 1, 3, 5, 2}) {
        for (int i = 0; i < dim; ++i) {
            double& slot = out(w, i);
            const double orig = slot;
            slot = orig + eps;
            const double up = ns_objective(hidden, out, target, negs);
            slot = orig - eps;
            const double down = ns_objective(hidden, out, target, negs);
            slot = orig;
            CHECK(rel_err(grad_out(w, i), (up - down) / (2 * eps)) < 1e-5);
        }
    }
}

TEST_CASE("unigram table follows the 3/4-power distribution within 3 sigma") {
    std::vector<std::int64_t> counts{1000, 300, 80, 40, 10, 5, 1};
    UnigramTable table(counts);
    double total = 0.0;
    std::vector<double> expected(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        expected[i] = std::pow(static_cast<double>(counts[i]), 0.75);
        total += expected[i];
    }
    const int draws = 1'000'000;
    std::vector<int> observed(counts.size(), 0);
    Rng rng(4242);
    for (int i = 0; i < draws; ++i) observed[static_cast<std::size_t>(table.sample(rng))]++;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double p = expected[i] / total;
        const double sigma = std::sqrt(p * (1 - p) * draws);
        CHECK(std::abs(observed[i] - p * draws) <= 3.0 * sigma);
    }
}

TEST_CASE("train: one repeated token converges to a confident prediction") {
    std::vector<std::string> tokens(50, "w");
    auto docs = std::vector<corpus::Document>{make_doc(0, tokens, 0)};
    Doc2VecConfig cfg;
    cfg.dim = 2;
    cfg.epochs = 50;
    cfg.seed = 5;
    auto model = train_doc2vec(docs, cfg);

    // hidden at a mid-document position: doc vector averaged with the
    // in-window copies of the same word
    std::vector<double> hidden(model.doc_vecs.row(0), model.doc_vecs.row(0) + 2);
    for (int k = 0; k < 10; ++k) nn::axpy(1.0, model.word_in.row_span(0), hidden);
    for (double& v : hidden) v /= 11.0;
    const double score = nn::dot(hidden, model.word_out.row_span(0));
    CHECK(1.0 / (1.0 + std::exp(-score)) > 0.9);
}

TEST_CASE("train: zero epochs leaves the initialization") {
    auto docs = std::vector<corpus::Document>{make_doc(0, {"a", "b"}, 0)};
    Doc2VecConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 0;
    cfg.seed = 9;
    auto model = train_doc2vec(docs, cfg);
    for (double v : model.word_out.values()) CHECK(v == 0.0);
    const double bound = 0.5 / 4.0;
    bool any_nonzero = false;
    for (double v : model.word_in.values()) {
        CHECK(std::abs(v) <= bound);
        any_nonzero |= v != 0.0;
    }
    CHECK(any_nonzero);
    for (double v : model.doc_vecs.values()) CHECK(std::abs(v) <= bound);
}

TEST_CASE("train: two disjoint topics separate by cosine margin 0.2") {
    auto docs = disjoint_two_topic(100, 7);
    Doc2VecConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 50;
    cfg.seed = 1234;
    auto model = train_doc2vec(docs, cfg);

    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    const int n = static_cast<int>(docs.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double c = cosine(model.doc_vecs.row_span(i), model.doc_vecs.row_span(j));
            if (*docs[static_cast<std::size_t>(i)].label ==
                *docs[static_cast<std::size_t>(j)].label) {
                intra += c;
                ++n_intra;
            } else {
                inter += c;
                ++n_inter;
            }
        }
    CHECK(intra / n_intra - inter / n_inter >= 0.2);
}

TEST_CASE("train: mean objective is non-decreasing over the first 10 epochs") {
    auto docs = disjoint_two_topic(100, 8);
    Doc2VecConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 10;
    cfg.seed = 77;
    auto model = train_doc2vec(docs, cfg);
    REQUIRE(model.epoch_objective.size() == 10);
    for (std::size_t e = 0; e + 1 < model.epoch_objective.size(); ++e)
        CHECK(model.epoch_objective[e + 1] >= model.epoch_objective[e] - 0.05);
}

TEST_CASE("train: sequential mode is bit-reproducible") {
    auto docs = disjoint_two_topic(20, 9);
    Doc2VecConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 5;
    cfg.seed = 31;
    auto a = train_doc2vec(docs, cfg, 0);
    auto b = train_doc2vec(docs, cfg, 0);
    CHECK(a.word_in == b.word_in);
    CHECK(a.doc_vecs == b.doc_vecs);
    CHECK(a.word_out == b.word_out);
}

TEST_CASE("infer: close to the trained vector on the synthetic corpus") {
    auto docs = corpus::synthetic_corpus(corpus::SyntheticSpec{}, 10);
    Doc2VecConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 50;
    cfg.seed = 11;
    auto model = train_doc2vec(docs, cfg);
    double worst = 1.0;
    for (int i : {0, 50, 150}) {
        auto inferred = infer_vector(model, docs[static_cast<std::size_t>(i)].tokens, 50, 1000);
        worst = std::min(worst, cosine(inferred, model.doc_vecs.row_span(i)));
    }
    CHECK(worst >= 0.5);
}

TEST_CASE("infer: edge cases") {
    auto docs = std::vector<corpus::Document>{make_doc(0, {"a", "b", "a"}, 0)};
    Doc2VecConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 2;
    cfg.seed = 3;
    auto model = train_doc2vec(docs, cfg);

    auto empty = infer_vector(model, {}, 10, 5);
    auto unknown = infer_vector(model, {"zz", "qq"}, 10, 5);
    CHECK(empty == unknown);  // all-unknown tokens leave the initialization
    const double bound = 0.5 / 4.0;
    for (double v : empty) CHECK(std::abs(v) <= bound);

    CHECK_THROWS_AS(infer_vector(model, {"a"}, 0, 5), std::invalid_argument);
}

TEST_CASE("embed_corpus: rows match trained vectors in order") {
    auto docs = std::vector<corpus::Document>{make_doc(5, {"a", "b"}, 0),
                                              make_doc(9, {"b", "c"}, 1),
                                              make_doc(2, {"c", "a"}, 0)};
    Doc2VecConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 3;
    cfg.seed = 8;
    auto model = train_doc2vec(docs, cfg);
    nn::Matrix m = embed_corpus(model, docs);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 4);
    for (int i = 0; i < 3; ++i) {
        auto row = model.doc_vector(docs[static_cast<std::size_t>(i)].id);
        for (int j = 0; j < 4; ++j) CHECK(m(i, j) == row[static_cast<std::size_t>(j)]);
    }

    auto stranger = std::vector<corpus::Document>{make_doc(777, {"a"}, 0)};
    CHECK_THROWS_AS(embed_corpus(model, stranger), UnknownDocumentError);
}

TEST_CASE("train: parallel mode produces a finite usable model") {
    auto docs = disjoint_two_topic(20, 12);
    Doc2VecConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 4;
    cfg.seed = 1;
    auto model = train_doc2vec(docs, cfg, 2);  // unsynchronized workers
    CHECK(model.word_in.all_finite());
    CHECK(model.doc_vecs.all_finite());
    CHECK(model.word_out.all_finite());
    CHECK(model.epoch_objective.size() == 4);
}

TEST_CASE("l2 normalization: unit rows, zero rows untouched") {
    nn::Matrix m(2, 3);
    m(0, 0) = 3.0;
    m(0, 1) = 4.0;
    l2_normalize_rows(m);
    CHECK(m(0, 0) == doctest::Approx(0.6));
    CHECK(m(0, 1) == doctest::Approx(0.8));
    CHECK(m(1, 0) == 0.0);
    CHECK(m(1, 1) == 0.0);
    CHECK(m(1, 2) == 0.0);
}
