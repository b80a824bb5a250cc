#include <doctest.h>

#include <cmath>

#include "reliance/errors.hpp"
#include "reliance/metrics.hpp"
#include "reliance/rng.hpp"
#include "reliance/splits.hpp"

using namespace reliance;
using namespace reliance::eval;

namespace {

std::vector<int> mixed_labels(int n_real, int n_fake, std::uint64_t seed) {
    std::vector<int> labels;
    labels.insert(labels.end(), static_cast<std::size_t>(n_real), 0);
    labels.insert(labels.end(), static_cast<std::size_t>(n_fake), 1);
    Rng rng(seed);
    rng.shuffle(labels);
    return labels;
}

}  // namespace

TEST_CASE("split: 20800 documents make a 16640/4160 split") {
    auto labels = mixed_labels(10608, 10192, 3);  // roughly 51/49
    SplitSpec spec;
    auto split = split_train_test(labels, spec);
    CHECK(split.train.size() == 16640);
    CHECK(split.test.size() == 4160);
}

TEST_CASE("split: balanced ten keeps four of each class in train") {
    auto labels = mixed_labels(5, 5, 4);
    SplitSpec spec;
    auto split = split_train_test(labels, spec);
    CHECK(split.train.size() == 8);
    int fakes = 0;
    for (int i : split.train) fakes += labels[static_cast<std::size_t>(i)];
    CHECK(fakes == 4);
}

TEST_CASE("split: deterministic under the same seed, disjoint and exhaustive") {
    auto labels = mixed_labels(60, 40, 5);
    SplitSpec spec;
    spec.seed = 123;
    auto a = split_train_test(labels, spec);
    auto b = split_train_test(labels, spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);

    std::vector<int> all = a.train;
    all.insert(all.end(), a.test.begin(), a.test.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 100; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("split: class proportions stay within one example per class") {
    auto labels = mixed_labels(67, 33, 6);
    SplitSpec spec;
    auto split = split_train_test(labels, spec);
    int train_fakes = 0;
    for (int i : split.train) train_fakes += labels[static_cast<std::size_t>(i)];
    const double exact = 0.8 * 33.0;
    CHECK(std::abs(train_fakes - exact) <= 1.0);
}

TEST_CASE("split: single class rejected") {
    std::vector<int> labels(10, 1);
    CHECK_THROWS_AS(split_train_test(labels, SplitSpec{}), SingleClassError);
}

TEST_CASE("k_fold: ten singletons for n=10, k=10") {
    auto labels = mixed_labels(5, 5, 7);
    auto folds = k_fold(labels, 10, 1);
    CHECK(folds.size() == 10);
    for (const auto& f : folds) {
        CHECK(f.validation.size() == 1);
        CHECK(f.train.size() == 9);
    }
}

TEST_CASE("k_fold: validation folds partition the index set") {
    auto labels = mixed_labels(40, 23, 8);
    auto folds = k_fold(labels, 7, 2);
    std::vector<int> seen;
    for (const auto& f : folds)
        seen.insert(seen.end(), f.validation.begin(), f.validation.end());
    CHECK(seen.size() == labels.size());
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<int>(i));
}

TEST_CASE("k_fold: 101 into 10 folds differs by at most one") {
    auto labels = mixed_labels(51, 50, 9);
    auto folds = k_fold(labels, 10, 3);
    std::size_t lo = labels.size(), hi = 0;
    for (const auto& f : folds) {
        lo = std::min(lo, f.validation.size());
        hi = std::max(hi, f.validation.size());
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("k_fold: contract errors") {
    auto labels = mixed_labels(3, 3, 10);
    CHECK_THROWS_AS(k_fold(labels, 1, 1), FoldTooSmallError);
    CHECK_THROWS_AS(k_fold(labels, 7, 1), FoldTooSmallError);
}

TEST_CASE("metrics: perfect classifier") {
    ConfusionMatrix cm{1, 0, 0, 1};
    auto m = compute_metrics(cm);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.accuracy == 1.0);
    CHECK(!m.degenerate);
}

TEST_CASE("metrics: published first-row consistency") {
    // counts engineered for precision exactly 0.71 and recall exactly 0.77
    ConfusionMatrix cm;
    cm.tp = 5467;
    cm.fp = 2233;
    cm.fn = 1633;
    cm.tn = 5000;
    auto m = compute_metrics(cm);
    CHECK(m.precision == doctest::Approx(0.71).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(0.77).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(2.0 * 0.71 * 0.77 / 1.48).epsilon(1e-12));
    CHECK(std::round(m.f1 * 100.0) == 74.0);
}

TEST_CASE("metrics: degenerate zero-over-zero and empty evaluation") {
    ConfusionMatrix cm;
    cm.tn = 5;
    cm.fn = 2;
    auto m = compute_metrics(cm);
    CHECK(m.precision == 0.0);
    CHECK(m.degenerate);

    CHECK_THROWS_AS(compute_metrics(ConfusionMatrix{}), EmptyEvaluationError);
}

TEST_CASE("metrics: brute-force recount oracle on random prediction sets") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(50));
        std::vector<int> truth(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            truth[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(2));
            pred[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(2));
        }
        ConfusionMatrix cm;
        for (int i = 0; i < n; ++i)
            cm.add(truth[static_cast<std::size_t>(i)], pred[static_cast<std::size_t>(i)]);

        // independent recount
        std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (int i = 0; i < n; ++i) {
            const int t = truth[static_cast<std::size_t>(i)];
            const int p = pred[static_cast<std::size_t>(i)];
            tp += (t == 1 && p == 1);
            fp += (t == 0 && p == 1);
            fn += (t == 1 && p == 0);
            tn += (t == 0 && p == 0);
        }
        CHECK(cm.tp == tp);
        CHECK(cm.fp == fp);
        CHECK(cm.fn == fn);
        CHECK(cm.tn == tn);

        auto m = compute_metrics(cm);
        const double expect_p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
        const double expect_r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
        const double expect_f =
            expect_p + expect_r > 0 ? 2 * expect_p * expect_r / (expect_p + expect_r) : 0.0;
        CHECK(std::abs(m.precision - expect_p) <= 1e-12);
        CHECK(std::abs(m.recall - expect_r) <= 1e-12);
        CHECK(std::abs(m.f1 - expect_f) <= 1e-12);
        CHECK(std::abs(m.accuracy - double(tp + tn) / n) <= 1e-12);
    }
}

TEST_CASE("metrics: constant classifier accuracy equals the majority rate") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(40));
        int positives = 0;
        ConfusionMatrix cm;
        for (int i = 0; i < n; ++i) {
            const int truth = static_cast<int>(rng.next_below(2));
            positives += truth;
            cm.add(truth, 1);  // constant fake classifier
        }
        auto m = compute_metrics(cm);
        CHECK(m.accuracy == doctest::Approx(double(positives) / n).epsilon(1e-12));
    }
}

TEST_CASE("reference rows: published per-model table") {
    auto table = model_reference_table();
    REQUIRE(table.size() == 6);
    CHECK(table[0].name == "BiLSTM");
    CHECK(table[0].accuracy == 73.57);
    CHECK(table[1].accuracy == 87.58);
    CHECK(table[2].accuracy == 89.29);
    CHECK(table[3].accuracy == 80.54);
    CHECK(table[4].accuracy == 86.00);
    CHECK(table[5].name == "Ensemble");
    CHECK(table[5].accuracy == 92.43);
    CHECK(reference_accuracy("SVM") == 89.29);
}

TEST_CASE("reference rows: external baselines kept verbatim with gaps") {
    auto rows = baseline_table();
    REQUIRE(rows.size() == 7);

    CHECK(rows[0].name == "Ghanem et al.");
    CHECK(!rows[0].precision.has_value());
    CHECK(rows[0].f1.value() == 48.80);
    CHECK(!rows[0].accuracy.has_value());

    CHECK(rows[1].name == "Singh et al.");
    CHECK(rows[1].precision.value() == 86.00);
    CHECK(rows[1].recall.value() == 90.00);
    CHECK(rows[1].f1.value() == 88.00);
    CHECK(rows[1].accuracy.value() == 87.00);

    // duplicated study entry is preserved
    CHECK(rows[2].name == "Ahmed et al.");
    CHECK(rows[2].accuracy.value() == 89.00);
    CHECK(rows[4].name == "Ahmed et al.");
    CHECK(rows[4].accuracy.value() == 92.00);

    CHECK(rows[5].name == "Yang et al.");
    CHECK(rows[5].precision.value() == 92.20);
    CHECK(!rows[5].accuracy.has_value());

    CHECK(rows[6].precision.value() == 92.49);
    CHECK(rows[6].recall.value() == 93.88);
    CHECK(rows[6].f1.value() == 92.75);
    CHECK(rows[6].accuracy.value() == 92.43);
}

TEST_CASE("stratified subsample keeps both classes near the requested size") {
    auto labels = mixed_labels(80, 20, 12);
    auto idx = stratified_subsample(labels, 0.2, 5);
    CHECK(idx.size() == 20);
    int fakes = 0;
    for (int i : idx) fakes += labels[static_cast<std::size_t>(i)];
    CHECK(fakes == 4);
}
