#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "reliance/base_models.hpp"
#include "reliance/errors.hpp"
#include "reliance/model_io.hpp"

using namespace reliance;
using namespace reliance::models;
using test_helpers::make_blobs;

TEST_CASE("logreg: separable 1-D data") {
    nn::Matrix x(20, 1);
    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = i < 10 ? -1.0 : 1.0;
        y[static_cast<std::size_t>(i)] = i < 10 ? 0 : 1;
    }
    LogRegConfig cfg;
    cfg.l1_lambda = 0.0;
    auto model = train_logreg(x, y, cfg);
    CHECK(model.weights[0] > 0.0);
    for (int i = 0; i < 20; ++i)
        CHECK((logreg_score(model, x.row_span(i)) >= 0.5 ? 1 : 0) == y[static_cast<std::size_t>(i)]);
}

TEST_CASE("logreg: huge l1 zeroes the weights exactly") {
    nn::Matrix x;
    std::vector<int> y;
    make_blobs(20, 3, 2.0, 0.5, 2, x, y);
    LogRegConfig cfg;
    cfg.l1_lambda = 1e3;
    auto model = train_logreg(x, y, cfg);
    for (double w : model.weights) CHECK(w == 0.0);
    // balanced classes: bias settles at the log-odds of one half
    CHECK(logreg_score(model, x.row_span(0)) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("logreg: single class rejected") {
    nn::Matrix x(4, 2);
    std::vector<int> y{0, 0, 0, 0};
    CHECK_THROWS_AS(train_logreg(x, y, LogRegConfig{}), SingleClassError);
}

TEST_CASE("logreg: stronger l1 never grows the support") {
    nn::Matrix x;
    std::vector<int> y;
    make_blobs(40, 6, 1.5, 0.8, 23, x, y);
    std::size_t last = x.cols() + 1;
    for (double lambda : {0.0, 1e-3, 1e-2, 5e-2, 0.2, 1.0}) {
        LogRegConfig cfg;
        cfg.l1_lambda = lambda;
        auto model = train_logreg(x, y, cfg);
        std::size_t nonzero = 0;
        for (double w : model.weights)
            if (w != 0.0) ++nonzero;
        CHECK(nonzero <= last);
        last = nonzero;
    }
}

TEST_CASE("svm: separable blobs, full accuracy and clean KKT") {
    nn::Matrix x;
    std::vector<int> y;
    make_blobs(100, 2, 2.0, 0.5, 5, x, y);
    auto model = train_svm_smo(x, y, SvmConfig{});
    CHECK(model.converged);
    for (int i = 0; i < x.rows(); ++i)
        CHECK((svm_score(model, x.row_span(i)) >= 0.5 ? 1 : 0) == y[static_cast<std::size_t>(i)]);
    for (double v : svm_kkt_violations(model, x, y)) CHECK(v < 1e-3);
}

TEST_CASE("svm: rbf shatters xor") {
    nn::Matrix x(4, 2);
    x(0, 0) = 0; x(0, 1) = 0;
    x(1, 0) = 0; x(1, 1) = 1;
    x(2, 0) = 1; x(2, 1) = 0;
    x(3, 0) = 1; x(3, 1) = 1;
    std::vector<int> y{0, 1, 1, 0};
    SvmConfig cfg;
    cfg.c = 10.0;
    cfg.gamma = 1.0;
    auto model = train_svm_smo(x, y, cfg);
    for (int i = 0; i < 4; ++i) {
        const double dec = svm_decision(model, x.row_span(i));
        CHECK((dec >= 0.0 ? 1 : 0) == y[static_cast<std::size_t>(i)]);
        CHECK((svm_score(model, x.row_span(i)) >= 0.5 ? 1 : 0) == y[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("svm: contract errors") {
    nn::Matrix x(4, 2);
    std::vector<int> y{1, 1, 1, 1};
    CHECK_THROWS_AS(train_svm_smo(x, y, SvmConfig{}), SingleClassError);

    nn::Matrix x2;
    std::vector<int> y2;
    make_blobs(50, 2, 2.0, 0.5, 6, x2, y2);
    SvmConfig tiny;
    tiny.cache_bytes = 100;  // cannot hold two kernel rows
    CHECK_THROWS_AS(train_svm_smo(x2, y2, tiny), BudgetTooSmallError);
}

TEST_CASE("platt: ordered decisions give a negative slope") {
    std::vector<double> decisions;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        decisions.push_back(i < 20 ? -1.0 - 0.05 * i : 1.0 + 0.05 * (i - 20));
        labels.push_back(i < 20 ? 0 : 1);
    }
    auto [a, b] = platt_calibrate(decisions, labels);
    CHECK(a < 0.0);
    CHECK(platt_probability(2.0, a, b) > 0.5);
    CHECK(platt_probability(-2.0, a, b) < 0.5);
}

TEST_CASE("platt: zero decisions give the smoothed base rate") {
    std::vector<double> decisions(10, 0.0);
    std::vector<int> labels{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};  // 3 of 10 positive
    auto [a, b] = platt_calibrate(decisions, labels);
    const double p = platt_probability(0.0, a, b);
    // mean smoothed target: (3*(4/5) + 7*(1/9)) / 10
    const double expected = (3.0 * (4.0 / 5.0) + 7.0 * (1.0 / 9.0)) / 10.0;
    CHECK(p == doctest::Approx(expected).epsilon(1e-3));
    CHECK(platt_probability(5.0, a, b) == doctest::Approx(p).epsilon(1e-6));
}

TEST_CASE("platt: probabilities strictly monotone in the decision value") {
    nn::Matrix x;
    std::vector<int> y;
    make_blobs(50, 2, 1.5, 0.7, 7, x, y);
    auto model = train_svm_smo(x, y, SvmConfig{});
    double prev = platt_probability(-5.0, model.platt_a, model.platt_b);
    for (double f = -4.5; f <= 5.0; f += 0.5) {
        const double p = platt_probability(f, model.platt_a, model.platt_b);
        CHECK(p > prev);
        prev = p;
    }
    CHECK_THROWS_AS(platt_calibrate(std::vector<double>{1.0, 2.0}, std::vector<int>{1, 1}),
                    SingleClassError);
}

TEST_CASE("forest: pure leaves give exact training accuracy") {
    nn::Matrix x;
    std::vector<int> y;
    make_blobs(60, 4, 1.0, 1.2, 8, x, y);  // overlapping blobs, but no duplicates
    ForestConfig cfg;
    cfg.seed = 21;
    auto model = train_forest(x, y, cfg);
    CHECK(model.trees.size() == 100);
    int correct = 0;
    for (int i = 0; i < x.rows(); ++i)
        correct += (forest_score(model, x.row_span(i)) >= 0.5 ? 1 : 0) == y[static_cast<std::size_t>(i)];
    CHECK(correct == x.rows());
}

TEST_CASE("forest: constant features collapse to majority leaves") {
    nn::Matrix x(10, 3);
    x.fill(1.0);
    std::vector<int> y{0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
    auto model = train_forest(x, y, ForestConfig{});
    // each tree is a single leaf holding its bootstrap sample's majority
    for (const auto& tree : model.trees) CHECK(tree.nodes.size() == 1);
    CHECK(forest_score(model, x.row_span(0)) < 0.5);
}

TEST_CASE("forest: same seed, bit-identical model") {
    nn::Matrix x;
    std::vector<int> y;
    make_blobs(30, 3, 1.5, 0.9, 12, x, y);
    ForestConfig cfg;
    cfg.seed = 99;
    auto a = train_forest(x, y, cfg);
    auto b = train_forest(x, y, cfg);
    CHECK(cli::encode_forest(a) == cli::encode_forest(b));
    // threaded build uses per-tree seeds and stays identical
    ForestConfig threaded = cfg;
    threaded.threads = 3;
    auto c = train_forest(x, y, threaded);
    CHECK(cli::encode_forest(a) == cli::encode_forest(c));
}

TEST_CASE("forest: empty input rejected") {
    nn::Matrix x(0, 3);
    std::vector<int> y;
    CHECK_THROWS_AS(train_forest(x, y, ForestConfig{}), EmptyInputError);
}

TEST_CASE("mnb: worked two-feature example") {
    nn::Matrix x(2, 2);
    x(0, 0) = 3.0; x(0, 1) = 1.0;  // class 0 totals (3, 1)
    x(1, 0) = 1.0; x(1, 1) = 3.0;  // class 1 totals (1, 3)
    std::vector<int> y{0, 1};
    auto model = train_mnb(x, y, 1.0);

    std::vector<double> query{1.0, 0.0};
    auto post = mnb_posterior(model, query);
    CHECK(std::abs(post[0] - 2.0 / 3.0) <= 1e-12);
    CHECK(mnb_score(model, query) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (int j = 0; j < 2; ++j) sum += std::exp(model.log_theta(c, j));
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("mnb: mirrored data scores one half on a symmetric query") {
    nn::Matrix x(4, 2);
    x(0, 0) = 2; x(0, 1) = 5;
    x(1, 0) = 1; x(1, 1) = 3;
    x(2, 0) = 5; x(2, 1) = 2;
    x(3, 0) = 3; x(3, 1) = 1;
    std::vector<int> y{0, 0, 1, 1};
    auto model = train_mnb(x, y, 1.0);
    std::vector<double> sym{2.0, 2.0};
    auto post = mnb_posterior(model, sym);
    CHECK(post[0] == doctest::Approx(0.5).epsilon(1e-12));

    // class relabeling flips the argmax consistently
    std::vector<int> flipped{1, 1, 0, 0};
    auto mirror = train_mnb(x, flipped, 1.0);
    std::vector<double> q{4.0, 1.0};
    CHECK((mnb_posterior(model, q)[0] > 0.5) == (mnb_posterior(mirror, q)[1] > 0.5));
}

TEST_CASE("mnb: negative features rejected") {
    nn::Matrix x(2, 2);
    x(0, 0) = -1.0;
    std::vector<int> y{0, 1};
    CHECK_THROWS_AS(train_mnb(x, y, 1.0), NegativeFeatureError);

    nn::Matrix ok(2, 2);
    ok(0, 0) = 1.0;
    ok(1, 1) = 1.0;
    auto model = train_mnb(ok, y, 1.0);
    std::vector<double> bad{-0.5, 1.0};
    CHECK_THROWS_AS(mnb_posterior(model, bad), NegativeFeatureError);
}

TEST_CASE("mnb: min-max scaling handles signed inputs and clips below") {
    nn::Matrix x(4, 2);
    x(0, 0) = -2.0; x(0, 1) = 0.0;
    x(1, 0) = -1.0; x(1, 1) = 1.0;
    x(2, 0) = 1.0;  x(2, 1) = 2.0;
    x(3, 0) = 2.0;  x(3, 1) = 3.0;
    std::vector<int> y{0, 0, 1, 1};
    auto model = train_mnb_scaled(x, y, 1.0);
    CHECK(model.feat_min[0] == -2.0);
    CHECK(model.feat_max[0] == 2.0);
    std::vector<double> below{-5.0, -5.0};  // clips to zero, scores cleanly
    const double p = mnb_score(model, below);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}

namespace {

// Toy task: label = whether word 0 occurs. Words are rows of a fixed
// random embedding table.
struct ToyTask {
    nn::Matrix words;
    std::vector<std::vector<int>> rows;
    std::vector<int> labels;
    std::vector<nn::SeqView> seqs;

    ToyTask(int n, int dim, std::uint64_t seed) : words(12, dim) {
        Rng rng(seed);
        for (double& v : words.values()) v = rng.next_double(-0.8, 0.8);
        for (int i = 0; i < n; ++i) {
            const int len = 5 + static_cast<int>(rng.next_below(4));
            std::vector<int> seq;
            const bool positive = rng.next_double() < 0.5;
            for (int t = 0; t < len; ++t)
                seq.push_back(1 + static_cast<int>(rng.next_below(11)));
            if (positive) seq[rng.next_below(static_cast<std::uint64_t>(len))] = 0;
            rows.push_back(std::move(seq));
            labels.push_back(positive ? 1 : 0);
        }
        for (const auto& r : rows) {
            nn::SeqView view;
            for (int idx : r) view.push_back(words.row_span(idx));
            seqs.push_back(std::move(view));
        }
    }
};

}  // namespace

TEST_CASE("bilstm: learns token presence and stops early") {
    ToyTask task(500, 8, 31);
    BiLstmConfig cfg;
    cfg.seed = 17;
    auto model = train_bilstm(task.seqs, task.labels, 8, cfg);

    REQUIRE(!model.log.val_accuracy.empty());
    double best = 0.0;
    for (double acc : model.log.val_accuracy) best = std::max(best, acc);
    CHECK(best >= 0.95);
    CHECK(model.log.stopped_epoch <= model.log.best_epoch + cfg.patience);
    CHECK(model.log.best_epoch >= 1);

    // inference is deterministic with dropout off
    const double p1 = bilstm_score(model, task.seqs[0]);
    const double p2 = bilstm_score(model, task.seqs[0]);
    CHECK(p1 == p2);
}

TEST_CASE("bilstm: default stack has the published layer geometry") {
    auto net = BiLstmNet::create(16, {64, 128, 64}, 64, 3);
    REQUIRE(net.layers.size() == 3);
    CHECK(net.layers[0].fwd.input_size() == 16);
    CHECK(net.layers[0].output_size() == 128);
    CHECK(net.layers[1].fwd.input_size() == 128);
    CHECK(net.layers[1].output_size() == 256);
    CHECK(net.layers[2].fwd.input_size() == 256);
    CHECK(net.layers[2].output_size() == 128);
    CHECK(net.dense_w.rows() == 64);
    CHECK(net.dense_w.cols() == 128);
    CHECK(net.out_w.rows() == 2);
    CHECK(net.out_w.cols() == 64);
}

TEST_CASE("bilstm: empty training set and empty sequences") {
    CHECK_THROWS_AS(train_bilstm({}, {}, 4, BiLstmConfig{}), EmptyInputError);

    // an empty sequence scores through a single zero step
    auto net = BiLstmNet::create(4, {3}, 3, 5);
    const auto probs = net.forward(nn::SeqView{});
    CHECK(probs[0] + probs[1] == doctest::Approx(1.0));
}

TEST_CASE("bilstm net: analytic gradients match finite differences (small)") {
    ToyTask task(6, 4, 77);
    BiLstmNet net = BiLstmNet::create(4, {3}, 3, 13);
    std::vector<nn::SeqView> batch(task.seqs.begin(), task.seqs.begin() + 4);
    std::vector<int> labels(task.labels.begin(), task.labels.begin() + 4);

    std::vector<nn::Matrix> grads;
    bilstm_net_gradients(net, batch, labels, 0.0, nullptr, grads);

    auto params = net.parameters();
    const double eps = 1e-5;
    for (std::size_t m = 0; m < params.size(); ++m) {
        for (std::size_t i = 0; i < params[m]->size(); ++i) {
            double& slot = params[m]->values()[i];
            const double orig = slot;
            slot = orig + eps;
            const double up = bilstm_net_loss(net, batch, labels);
            slot = orig - eps;
            const double down = bilstm_net_loss(net, batch, labels);
            slot = orig;
            CHECK(test_helpers::rel_err(grads[m].values()[i], (up - down) / (2 * eps)) < 1e-4);
        }
    }
}

TEST_CASE("score dispatch: fixed column semantics") {
    BaseModelSet set;

    set.forest.trees.resize(100);
    for (auto& tree : set.forest.trees) {
        tree.nodes.resize(1);
        tree.nodes[0].label = 1;
    }
    std::vector<double> x{0.5, 0.5};
    PredictInput input;
    input.features = x;
    CHECK(score(BaseModelKind::RandomForest, set, input) == 1.0);

    set.logreg.weights = {0.0, 0.0};
    set.logreg.bias = 0.0;
    CHECK(score(BaseModelKind::LogReg, set, input) == 0.5);

    nn::Matrix mx(2, 2);
    mx(0, 0) = 3.0; mx(0, 1) = 1.0;
    mx(1, 0) = 1.0; mx(1, 1) = 3.0;
    set.mnb = train_mnb(mx, {0, 1}, 1.0);
    std::vector<double> q{1.0, 0.0};
    PredictInput mq;
    mq.features = q;
    CHECK(score(BaseModelKind::NaiveBayes, set, mq) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}
