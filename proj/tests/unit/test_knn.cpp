#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"

using namespace headglance;

namespace {

LabeledSet random_set(std::mt19937_64& rng, std::size_t n, bool grid) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<int> cell(-3, 3);
    LabeledSet s;
    for (std::size_t i = 0; i < n; ++i) {
        // Grid points create many exact distance ties.
        FeatureVector x = grid ? FeatureVector{double(cell(rng)), double(cell(rng)), double(cell(rng))}
                               : FeatureVector{g(rng), g(rng), g(rng)};
        s.x.push_back(x);
        s.y.push_back(x[0] + 0.3 * g(rng) > 0 ? GlanceRegion::CenterStack : GlanceRegion::Forward);
    }
    return s;
}

std::vector<std::size_t> brute_neighbours(const LabeledSet& s, const FeatureVector& q, int k) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto d2 = [&](std::size_t i) {
        double d = 0;
        for (int f = 0; f < 3; ++f) d += (s.x[i][f] - q[f]) * (s.x[i][f] - q[f]);
        return d;
    };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d2(a) < d2(b); });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace

TEST_CASE("k-d tree search matches brute force") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.5);
    for (bool grid : {false, true}) {
        for (int k : {1, 3, 5, 9}) {
            const auto train = random_set(rng, 400, grid);
            const KnnModel model(train, {k});
            for (int q = 0; q < 200; ++q) {
                const FeatureVector x = grid ? FeatureVector{std::round(g(rng)), std::round(g(rng)), std::round(g(rng))}
                                             : FeatureVector{g(rng), g(rng), g(rng)};
                const auto expect = brute_neighbours(train, x, k);
                CHECK(model.neighbours(x) == expect);
                int pos = 0;
                for (auto i : expect) pos += train.y[i] == GlanceRegion::CenterStack ? 1 : 0;
                const auto majority = 2 * pos > k ? GlanceRegion::CenterStack : GlanceRegion::Forward;
                CHECK(model.classify(x) == majority);
            }
        }
    }
}

TEST_CASE("k = 1 reproduces training labels for distinct points") {
    std::mt19937_64 rng(6);
    const auto train = random_set(rng, 300, false);
    const KnnModel model(train, {1});
    for (std::size_t i = 0; i < train.size(); ++i) CHECK(model.classify(train.x[i]) == train.y[i]);
}

TEST_CASE("invalid k") {
    std::mt19937_64 rng(1);
    const auto train = random_set(rng, 10, false);
    CHECK_THROWS_AS(KnnModel(train, {2}), PreconditionError);
    CHECK_THROWS_AS(KnnModel(train, {0}), PreconditionError);
    CHECK_THROWS_AS(KnnModel(train, {11}), PreconditionError);
    CHECK_NOTHROW(KnnModel(train, {9}));
}
