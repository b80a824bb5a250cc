#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace reliance::eval {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    bool stratified = true;
};

struct TrainTestSplit {
    std::vector<int> train;
    std::vector<int> test;
};

// Deterministic shuffle, stratified by default. Train size is
// floor(train_fraction * n); per-class counts stay within one example of the
// exact class proportion (largest-remainder rounding).
TrainTestSplit split_train_test(const std::vector<int>& labels, const SplitSpec& spec);

struct Fold {
    std::vector<int> train;
    std::vector<int> validation;
};

// Stratified, disjoint, exhaustive folds; fold sizes differ by at most one.
std::vector<Fold> k_fold(const std::vector<int>& labels, int k, std::uint64_t seed);

// Stratified subset of roughly fraction * n indices (used by the desk
// profile). Result is sorted.
std::vector<int> stratified_subsample(const std::vector<int>& labels, double fraction,
                                      std::uint64_t seed);

}  // namespace reliance::eval
