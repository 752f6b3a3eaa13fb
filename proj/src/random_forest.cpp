#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tfs/error.hpp"
#include "tfs/model_zoo.hpp"

namespace tfs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Label majority(std::size_t benign, std::size_t malicious) {
    return malicious > benign ? Label::malicious : Label::benign;
}

double gini(std::size_t benign, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(benign) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

/// Column-major training view shared by every tree.
struct TrainingView {
    std::vector<std::vector<double>> columns;
    std::vector<int> labels;
};

class TreeBuilder {
public:
    TreeBuilder(const TrainingView& view, const RandomForestParams& params, std::uint64_t seed)
        : view_(view), params_(params), rng_(seed) {}

    DecisionTree build(std::vector<std::size_t> sample) {
        nodes_.clear();
        grow(sample, 0);
        return DecisionTree(std::move(nodes_));
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    int grow(std::vector<std::size_t>& sample, std::size_t depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        std::size_t mal = 0;
        for (std::size_t i : sample) mal += static_cast<std::size_t>(view_.labels[i]);
        const std::size_t ben = sample.size() - mal;
        nodes_[id].leaf_label = majority(ben, mal);

        const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
        if (ben == 0 || mal == 0 || depth_capped || sample.size() < params_.min_samples_split) return id;

        const Split split = find_split(sample, ben);
        if (split.feature < 0) return id;

        const auto& col = view_.columns[static_cast<std::size_t>(split.feature)];
        std::vector<std::size_t> left, right;
        for (std::size_t i : sample) (col[i] <= split.threshold ? left : right).push_back(i);
        sample.clear();
        sample.shrink_to_fit();

        nodes_[id].feature = split.feature;
        nodes_[id].threshold = split.threshold;
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    Split find_split(const std::vector<std::size_t>& sample, std::size_t ben) {
        const std::size_t p = view_.columns.size();
        const std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
        std::vector<std::size_t> order(p);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng_);

        const double parent = gini(ben, sample.size());
        Split best;
        best.impurity = parent;
        std::vector<std::pair<double, int>> sorted(sample.size());
        // Keep drawing candidates past mtry until some feature separates the node.
        for (std::size_t k = 0; k < p && (k < mtry || best.feature < 0); ++k) {
            const std::size_t f = order[k];
            const auto& col = view_.columns[f];
            for (std::size_t j = 0; j < sample.size(); ++j) sorted[j] = {col[sample[j]], view_.labels[sample[j]]};
            std::sort(sorted.begin(), sorted.end());

            const std::size_t n = sorted.size();
            std::size_t left_ben = 0;
            for (std::size_t j = 0; j + 1 < n; ++j) {
                if (sorted[j].second == 0) ++left_ben;
                if (sorted[j].first == sorted[j + 1].first) continue;
                const std::size_t nl = j + 1, nr = n - nl;
                const double w = (static_cast<double>(nl) * gini(left_ben, nl) +
                                  static_cast<double>(nr) * gini(ben - left_ben, nr)) /
                                 static_cast<double>(n);
                if (best.feature < 0 || w < best.impurity) {
                    double thr = 0.5 * (sorted[j].first + sorted[j + 1].first);
                    if (!(thr < sorted[j + 1].first)) thr = sorted[j].first;
                    best = {static_cast<int>(f), thr, w};
                }
            }
        }
        return best;
    }

    const TrainingView& view_;
    const RandomForestParams& params_;
    std::mt19937_64 rng_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw input_error("decision tree has no nodes");
    const int n = static_cast<int>(nodes_.size());
    for (int i = 0; i < n; ++i) {
        const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
        if (node.is_leaf()) continue;
        if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
            throw input_error("decision tree node " + std::to_string(i) + " has invalid children");
        }
    }
}

DecisionTree DecisionTree::constant(Label label) {
    TreeNode leaf;
    leaf.leaf_label = label;
    return DecisionTree({leaf});
}

DecisionTree DecisionTree::stump(int feature, double threshold, Label low, Label high) {
    TreeNode root;
    root.feature = feature;
    root.threshold = threshold;
    root.left = 1;
    root.right = 2;
    TreeNode l, r;
    l.leaf_label = low;
    r.leaf_label = high;
    return DecisionTree({root, l, r});
}

Label DecisionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].leaf_label;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t deepest = 0;
    // Children always follow their parent, so one forward pass suffices.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes_[i].is_leaf()) continue;
        d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
    return deepest;
}

std::size_t DecisionTree::input_arity() const {
    int top = -1;
    for (const TreeNode& n : nodes_) top = std::max(top, n.feature);
    return static_cast<std::size_t>(top + 1);
}

RandomForest::RandomForest(RandomForestParams params, std::vector<DecisionTree> trees)
    : params_(std::move(params)), trees_(std::move(trees)) {
    if (trees_.empty()) throw input_error("random forest needs at least one tree");
    params_.n_estimators = trees_.size();
}

std::array<double, kClassCount> RandomForest::probabilities(std::span<const double> x) const {
    std::size_t mal = 0;
    for (const DecisionTree& t : trees_) mal += t.predict(x) == Label::malicious ? 1 : 0;
    const double p_mal = static_cast<double>(mal) / static_cast<double>(trees_.size());
    return {1.0 - p_mal, p_mal};
}

ClassifierModel train_random_forest(const Dataset& train, std::vector<Feature> features,
                                    const RandomForestParams& params) {
    if (params.n_estimators < 1) throw input_error("train_random_forest: n_estimators must be >= 1");
    if (params.max_depth && *params.max_depth < 1) throw input_error("train_random_forest: max_depth must be >= 1");
    if (features.empty()) throw input_error("train_random_forest: no input features");
    features = canonical_order(std::move(features));
    if (train.empty()) throw training_error("train_random_forest: empty training set");
    if (train.count(Label::benign) == 0 || train.count(Label::malicious) == 0) {
        throw training_error("train_random_forest: training data must contain both classes");
    }

    TrainingView view;
    view.columns.assign(features.size(), std::vector<double>(train.size()));
    view.labels.resize(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t f = 0; f < features.size(); ++f) view.columns[f][i] = train.rows[i][features[f]];
        view.labels[i] = static_cast<int>(train.rows[i].label);
    }

    std::vector<DecisionTree> trees;
    trees.reserve(params.n_estimators);
    const std::size_t n = train.size();
    for (std::size_t t = 0; t < params.n_estimators; ++t) {
        // Each tree owns a seed derived from (forest seed, tree index), so a
        // forest of k trees is a prefix of any larger forest with the same seed.
        const std::uint64_t tree_seed = splitmix64(params.seed ^ splitmix64(t));
        std::mt19937_64 boot(tree_seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = pick(boot);
        trees.push_back(TreeBuilder(view, params, splitmix64(tree_seed)).build(std::move(sample)));
    }
    return ClassifierModel(std::move(features), RandomForest(params, std::move(trees)));
}

}  // namespace tfs
