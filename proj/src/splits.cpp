#include "reliance/splits.hpp"

#include <algorithm>
#include <cmath>

#include "reliance/errors.hpp"
#include "reliance/rng.hpp"

namespace reliance::eval {
namespace {

std::vector<std::vector<int>> indices_by_class(const std::vector<int>& labels) {
    std::vector<std::vector<int>> by_class(2);
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
    return by_class;
}

void require_both_classes(const std::vector<std::vector<int>>& by_class, const char* where) {
    if (by_class[0].empty() || by_class[1].empty())
        throw SingleClassError(std::string(where) + ": needs both classes");
}

}  // namespace

TrainTestSplit split_train_test(const std::vector<int>& labels, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw ConfigError("split_train_test: train_fraction must lie in (0, 1)");
    const int n = static_cast<int>(labels.size());
    auto by_class = indices_by_class(labels);
    require_both_classes(by_class, "split_train_test");

    Rng rng(derive_seed(spec.seed, 11));
    TrainTestSplit split;

    if (!spec.stratified) {
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        rng.shuffle(order);
        const int n_train = static_cast<int>(std::floor(spec.train_fraction * n));
        split.train.assign(order.begin(), order.begin() + n_train);
        split.test.assign(order.begin() + n_train, order.end());
    } else {
        const int target_train = static_cast<int>(std::floor(spec.train_fraction * n));
        // Largest-remainder rounding of the per-class train counts.
        std::vector<int> take(2);
        std::vector<double> remainder(2);
        int assigned = 0;
        for (int c = 0; c < 2; ++c) {
            const double exact =
                spec.train_fraction * static_cast<double>(by_class[static_cast<std::size_t>(c)].size());
            take[static_cast<std::size_t>(c)] = static_cast<int>(std::floor(exact));
            remainder[static_cast<std::size_t>(c)] = exact - std::floor(exact);
            assigned += take[static_cast<std::size_t>(c)];
        }
        int leftover = target_train - assigned;
        while (leftover > 0) {
            const int c = remainder[0] >= remainder[1] ? 0 : 1;
            take[static_cast<std::size_t>(c)] += 1;
            remainder[static_cast<std::size_t>(c)] = -1.0;
            --leftover;
        }
        for (int c = 0; c < 2; ++c) {
            auto& idx = by_class[static_cast<std::size_t>(c)];
            rng.shuffle(idx);
            const int t = std::min<int>(take[static_cast<std::size_t>(c)],
                                        static_cast<int>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i)
                (static_cast<int>(i) < t ? split.train : split.test).push_back(idx[i]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<Fold> k_fold(const std::vector<int>& labels, int k, std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (k < 2) throw FoldTooSmallError("k_fold: k must be >= 2");
    if (n < k) throw FoldTooSmallError("k_fold: fewer samples than folds");

    auto by_class = indices_by_class(labels);
    Rng rng(derive_seed(seed, 13));

    // Deal class by class into a running fold cursor so overall fold sizes
    // stay within one of each other.
    std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
    int cursor = 0;
    for (auto& cls : by_class) {
        rng.shuffle(cls);
        for (int idx : cls) {
            members[static_cast<std::size_t>(cursor)].push_back(idx);
            cursor = (cursor + 1) % k;
        }
    }

    std::vector<Fold> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        auto& fold = folds[static_cast<std::size_t>(f)];
        fold.validation = members[static_cast<std::size_t>(f)];
        std::sort(fold.validation.begin(), fold.validation.end());
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            fold.train.insert(fold.train.end(), members[static_cast<std::size_t>(g)].begin(),
                              members[static_cast<std::size_t>(g)].end());
        }
        std::sort(fold.train.begin(), fold.train.end());
    }
    return folds;
}

std::vector<int> stratified_subsample(const std::vector<int>& labels, double fraction,
                                      std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw ConfigError("stratified_subsample: fraction must lie in (0, 1]");
    auto by_class = indices_by_class(labels);
    Rng rng(derive_seed(seed, 17));
    std::vector<int> picked;
    for (auto& cls : by_class) {
        rng.shuffle(cls);
        const std::size_t keep = std::max<std::size_t>(
            cls.empty() ? 0 : 1,
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cls.size()))));
        for (std::size_t i = 0; i < std::min(keep, cls.size()); ++i) picked.push_back(cls[i]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace reliance::eval
