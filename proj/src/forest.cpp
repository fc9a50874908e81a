#include <algorithm>
#include <numeric>

#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"
#include "headglance/rng.hpp"

namespace headglance {

namespace {

// Each node owns the same range [lo, hi) of three index arrays, each kept
// sorted by one feature, so split search needs no per-node sort.
struct TreeBuilder {
    const std::vector<FeatureVector>& x;
    const std::vector<std::uint32_t>& y;  // class indices
    std::size_t n_classes;
    const ForestParams& params;
    Rng& rng;
    DecisionTree tree;
    std::array<std::vector<std::uint32_t>, 3> order;
    std::vector<std::uint32_t> scratch;
    std::vector<std::uint8_t> goes_left;  // per training index

    std::int32_t grow(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t n = hi - lo;
        std::vector<std::uint32_t> counts(n_classes, 0U);
        for (std::size_t i = lo; i < hi; ++i) ++counts[y[order[0][i]]];
        // Class indices follow label_less order, so the first maximum is the tie-break winner.
        const auto label = static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        const auto self = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, label, static_cast<std::uint32_t>(n)});

        const bool pure = counts[label] == n;
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params.min_leaf));
        if (pure || depth >= params.max_depth || n < 2 * min_leaf) return self;

        // Random feature subset without replacement.
        std::array<int, 3> features{0, 1, 2};
        const int m = std::clamp(params.features_per_split, 1, 3);
        for (int i = 0; i < m; ++i) {
            std::swap(features[static_cast<std::size_t>(i)],
                      features[static_cast<std::size_t>(i) + uniform_index(rng, static_cast<std::uint64_t>(3 - i))]);
        }

        double parent_total = 0.0;
        for (auto c : counts) parent_total += static_cast<double>(c) * static_cast<double>(c);
        double best_score = -1.0;  // larger is better: sum of squared child counts / child size
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::uint32_t> left(n_classes), right(n_classes);
        for (int fi = 0; fi < m; ++fi) {
            const int f = features[static_cast<std::size_t>(fi)];
            const auto& sorted = order[static_cast<std::size_t>(f)];
            std::fill(left.begin(), left.end(), 0U);
            right = counts;
            double left_sq = 0.0, right_sq = parent_total;
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                const auto c = y[sorted[i]];
                // Incremental sum of squared class counts on each side.
                left_sq += 2.0 * left[c] + 1.0;
                right_sq -= 2.0 * right[c] - 1.0;
                ++left[c];
                --right[c];
                const double v = x[sorted[i]][f], vn = x[sorted[i + 1]][f];
                if (v == vn) continue;
                const std::size_t nl = i + 1 - lo, nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                // Minimising weighted Gini == maximising sum_c n_lc^2/n_l + n_rc^2/n_r.
                const double score = left_sq / static_cast<double>(nl) + right_sq / static_cast<double>(nr);
                if (score > best_score + 1e-12) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (v + vn);
                }
            }
        }
        if (best_feature < 0 || best_score <= parent_total / static_cast<double>(n) + 1e-12) return self;

        for (std::size_t i = lo; i < hi; ++i) {
            const auto s = order[0][i];
            goes_left[s] = x[s][best_feature] <= best_threshold ? 1 : 0;
        }
        std::size_t mid = lo;
        for (auto& arr : order) {
            // Stable partition through the scratch buffer.
            std::size_t l = lo, r = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                if (goes_left[arr[i]]) {
                    arr[l++] = arr[i];
                } else {
                    scratch[r++] = arr[i];
                }
            }
            std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(r),
                      arr.begin() + static_cast<std::ptrdiff_t>(l));
            mid = l;
        }
        const auto lchild = grow(lo, mid, depth + 1);
        const auto rchild = grow(mid, hi, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(self)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = lchild;
        node.right = rchild;
        return self;
    }
};

}  // namespace

std::uint32_t DecisionTree::predict(const FeatureVector& x) const {
    std::size_t n = 0;
    while (nodes[n].feature >= 0) {
        n = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left
                                                                                                     : nodes[n].right);
    }
    return nodes[n].leaf_class;
}

int DecisionTree::depth() const {
    auto rec = [&](auto&& self, std::int32_t n) -> int {
        const auto& node = nodes[static_cast<std::size_t>(n)];
        if (node.feature < 0) return 0;
        return 1 + std::max(self(self, node.left), self(self, node.right));
    };
    return nodes.empty() ? 0 : rec(rec, 0);
}

std::vector<int> ForestModel::votes(const FeatureVector& x) const {
    std::vector<int> v(classes.size(), 0);
    for (const auto& t : trees) ++v[t.predict(x)];
    return v;
}

Label ForestModel::classify(const FeatureVector& x) const {
    const auto v = votes(x);
    return classes[static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin())];
}

ForestModel forest_train(const LabeledSet& train, const ForestParams& params, std::uint64_t seed) {
    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.classes = distinct_labels(train.y);
    if (model.classes.size() < 2) throw PreconditionError("forest_train: need at least 2 classes");
    if (params.tree_count < 1) throw PreconditionError("forest_train: tree_count must be >= 1");

    std::vector<std::uint32_t> y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        y[i] = static_cast<std::uint32_t>(
            std::lower_bound(model.classes.begin(), model.classes.end(), train.y[i], label_less) -
            model.classes.begin());
    }
    const std::size_t n = train.size();
    // Global (value, index) order per feature, shared by every tree.
    std::array<std::vector<std::uint32_t>, 3> global;
    for (std::size_t f = 0; f < 3; ++f) {
        global[f].resize(n);
        std::iota(global[f].begin(), global[f].end(), 0U);
        std::sort(global[f].begin(), global[f].end(), [&](std::uint32_t a, std::uint32_t b) {
            return train.x[a][f] < train.x[b][f] || (train.x[a][f] == train.x[b][f] && a < b);
        });
    }
    model.trees.reserve(static_cast<std::size_t>(params.tree_count));
    std::vector<std::uint32_t> multiplicity(n);
    for (int t = 0; t < params.tree_count; ++t) {
        auto rng = make_rng(seed, "forest-tree", static_cast<std::uint64_t>(t));
        if (params.bootstrap) {
            std::fill(multiplicity.begin(), multiplicity.end(), 0U);
            for (std::size_t i = 0; i < n; ++i) ++multiplicity[uniform_index(rng, n)];
        } else {
            std::fill(multiplicity.begin(), multiplicity.end(), 1U);
        }
        TreeBuilder b{train.x, y, model.classes.size(), params, rng, {}, {}, std::vector<std::uint32_t>(n), std::vector<std::uint8_t>(n)};
        for (std::size_t f = 0; f < 3; ++f) {
            b.order[f].reserve(n);
            for (auto i : global[f]) b.order[f].insert(b.order[f].end(), multiplicity[i], i);
        }
        b.grow(0, n, 0);
        model.trees.push_back(std::move(b.tree));
    }
    return model;
}

}  // namespace headglance
