#include <algorithm>
#include <cmath>
#include <thread>

#include "reliance/base_models.hpp"
#include "reliance/errors.hpp"

namespace reliance::models {
namespace {

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

double gini(double c0, double c1) {
    const double n = c0 + c1;
    if (n == 0.0) return 0.0;
    const double p0 = c0 / n;
    const double p1 = c1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
  public:
    TreeBuilder(const nn::Matrix& x, const std::vector<int>& y, int min_samples_split,
                Rng& rng)
        : x_(x), y_(y), min_split_(min_samples_split), rng_(rng) {
        mtry_ = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
        features_.resize(static_cast<std::size_t>(x.cols()));
        for (int j = 0; j < x.cols(); ++j) features_[static_cast<std::size_t>(j)] = j;
    }

    DecisionTree build(std::vector<int> sample_indices) {
        tree_.nodes.clear();
        grow(std::move(sample_indices));
        return std::move(tree_);
    }

  private:
    int grow(std::vector<int> idx) {
        int c1 = 0;
        for (int i : idx) c1 += y_[static_cast<std::size_t>(i)];
        const int c0 = static_cast<int>(idx.size()) - c1;

        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        SplitChoice best;
        if (c0 != 0 && c1 != 0 && static_cast<int>(idx.size()) >= min_split_)
            best = find_split(idx, c0, c1);

        if (best.feature < 0) {
            // tie on equal counts resolves to the lower class index
            tree_.nodes[static_cast<std::size_t>(node_id)].label = c1 > c0 ? 1 : 0;
            return node_id;
        }

        std::vector<int> left, right;
        left.reserve(idx.size());
        right.reserve(idx.size());
        for (int i : idx)
            (x_(i, best.feature) < best.threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int left_id = grow(std::move(left));
        const int right_id = grow(std::move(right));
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
        return node_id;
    }

    SplitChoice find_split(const std::vector<int>& idx, int c0, int c1) {
        // Draw features without replacement in batches of mtry. When a batch
        // yields no usable split the scan extends to further batches, so an
        // impure node only becomes a leaf once every feature failed. Each
        // batch is scanned in ascending feature order so equal gains resolve
        // to the lowest feature index.
        const int d = x_.cols();
        const double n = static_cast<double>(idx.size());
        const double parent = gini(c0, c1);
        SplitChoice best;

        std::vector<std::pair<double, int>>& vals = scratch_;
        for (int batch_start = 0; batch_start < d; batch_start += mtry_) {
            const int batch_end = std::min(d, batch_start + mtry_);
            for (int k = batch_start; k < batch_end; ++k) {
                const int pick =
                    k + static_cast<int>(rng_.next_below(static_cast<std::uint64_t>(d - k)));
                std::swap(features_[static_cast<std::size_t>(k)],
                          features_[static_cast<std::size_t>(pick)]);
            }
            std::sort(features_.begin() + batch_start, features_.begin() + batch_end);

            for (int k = batch_start; k < batch_end; ++k) {
                const int f = features_[static_cast<std::size_t>(k)];
                vals.clear();
                for (int i : idx)
                    vals.emplace_back(x_(i, f), y_[static_cast<std::size_t>(i)]);
                std::sort(vals.begin(), vals.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });

                double l0 = 0.0, l1 = 0.0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    if (vals[i].second)
                        l1 += 1.0;
                    else
                        l0 += 1.0;
                    if (vals[i].first == vals[i + 1].first) continue;
                    const double mid = (vals[i].first + vals[i + 1].first) / 2.0;
                    if (mid <= vals[i].first || mid >= vals[i + 1].first) continue;
                    const double r0 = static_cast<double>(c0) - l0;
                    const double r1 = static_cast<double>(c1) - l1;
                    const double nl = l0 + l1;
                    const double nr = r0 + r1;
                    const double gain =
                        parent - (nl / n) * gini(l0, l1) - (nr / n) * gini(r0, r1);
                    if (gain > best.gain) {
                        best.gain = gain;
                        best.feature = f;
                        best.threshold = mid;
                    }
                }
            }
            if (best.feature >= 0) break;
        }
        return best;
    }

    const nn::Matrix& x_;
    const std::vector<int>& y_;
    int min_split_;
    int mtry_;
    Rng& rng_;
    std::vector<int> features_;
    std::vector<std::pair<double, int>> scratch_;
    DecisionTree tree_;
};

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].label;
}

ForestModel train_forest(const nn::Matrix& x, const std::vector<int>& y,
                         const ForestConfig& config) {
    const int n = x.rows();
    if (n == 0) throw EmptyInputError("train_forest: empty input");
    if (static_cast<int>(y.size()) != n)
        throw ShapeMismatchError("train_forest: label count does not match rows");

    ForestModel model;
    model.config = config;
    model.trees.resize(static_cast<std::size_t>(config.trees));

    auto build_range = [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
            std::vector<int> bootstrap(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                bootstrap[static_cast<std::size_t>(i)] =
                    static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
            TreeBuilder builder(x, y, config.min_samples_split, rng);
            model.trees[static_cast<std::size_t>(t)] = builder.build(std::move(bootstrap));
        }
    };

    if (config.threads <= 1) {
        build_range(0, config.trees);
    } else {
        // Trees carry their own seeds, so this is still bit-reproducible.
        std::vector<std::thread> pool;
        const int per = (config.trees + config.threads - 1) / config.threads;
        for (int w = 0; w < config.threads; ++w) {
            const int begin = w * per;
            const int end = std::min(config.trees, begin + per);
            if (begin >= end) break;
            pool.emplace_back(build_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return model;
}

double forest_score(const ForestModel& model, std::span<const double> x) {
    if (model.trees.empty()) throw UntrainedModelError("forest_score: model not trained");
    int votes = 0;
    for (const auto& tree : model.trees) votes += tree.predict(x);
    return static_cast<double>(votes) / static_cast<double>(model.trees.size());
}

}  // namespace reliance::models
