#include <cmath>
#include <random>

#include "doctest.h"
#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"

using namespace headglance;

namespace {

constexpr std::array<Label, 2> kClasses{GlanceRegion::Forward, GlanceRegion::CenterStack};

double max_relative_gradient_error(const MlpModel& m, const std::vector<FeatureVector>& x, const std::vector<int>& t) {
    std::vector<double> analytic;
    mlp_loss(m, x, t, &analytic);
    auto p = m.parameters();
    MlpModel probe = m;
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        probe.set_parameters(p);
        const double up = mlp_loss(probe, x, t);
        p[i] = keep - h;
        probe.set_parameters(p);
        const double down = mlp_loss(probe, x, t);
        p[i] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-7});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

LabeledSet xor_set() {
    LabeledSet s;
    for (int rep = 0; rep < 25; ++rep) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                s.x.push_back({a ? 1.0 : -1.0, b ? 1.0 : -1.0, 0.0});
                s.y.push_back(a != b ? GlanceRegion::CenterStack : GlanceRegion::Forward);
            }
        }
    }
    return s;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int config = 0; config < 10; ++config) {
        MlpParams p;
        p.hidden = 2 + config;
        p.init_range = 0.3 + 0.1 * config;
        const auto m = mlp_init(kClasses, p, static_cast<std::uint64_t>(config));
        std::vector<FeatureVector> x;
        std::vector<int> t;
        for (int i = 0; i < 20; ++i) {
            x.push_back({g(rng), g(rng), g(rng)});
            t.push_back(i % 3 == 0 ? 1 : 0);
        }
        CHECK(max_relative_gradient_error(m, x, t) < 1e-4);
    }
}

TEST_CASE("learns XOR") {
    MlpParams p;
    p.hidden = 8;
    p.learning_rate = 0.5;
    p.epochs = 400;
    p.batch_size = 10;
    p.init_range = 1.0;
    const auto train = xor_set();
    const auto m = mlp_train(train, p, 3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(m.classify(train.x[i]) == train.y[i]);
    CHECK(m.loss_trace.back() < 0.1);
}

TEST_CASE("zero initialisation keeps hidden units identical") {
    MlpParams p;
    p.hidden = 4;
    p.init_range = 0.0;
    p.epochs = 20;
    const auto m = mlp_train(xor_set(), p, 1);
    for (std::size_t j = 1; j < 4; ++j) {
        for (std::size_t k = 0; k < 3; ++k) CHECK(m.w1[j * 3 + k] == m.w1[k]);
        CHECK(m.b1[j] == m.b1[0]);
        CHECK(m.w2[j] == m.w2[0]);
        CHECK(m.w2[4 + j] == m.w2[4]);
    }
}

TEST_CASE("epoch loss trends down on separable data") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 0.7);
    LabeledSet s;
    for (int i = 0; i < 400; ++i) {
        const bool pos = i % 2 == 1;
        s.x.push_back({g(rng) + (pos ? 1.0 : -1.0), g(rng), g(rng)});
        s.y.push_back(pos ? GlanceRegion::CenterStack : GlanceRegion::Forward);
    }
    MlpParams p;
    p.epochs = 60;
    const auto m = mlp_train(s, p, 8);
    REQUIRE(m.loss_trace.size() == 60);
    for (std::size_t e = 1; e < m.loss_trace.size(); ++e) CHECK(m.loss_trace[e] <= m.loss_trace[e - 1] * 1.05);
    CHECK(m.loss_trace.back() < m.loss_trace.front());
    const auto again = mlp_train(s, p, 8);
    CHECK(again.parameters() == m.parameters());
}

TEST_CASE("probabilities sum to one and labels follow class order") {
    const auto m = mlp_init(kClasses, {}, 5);
    const auto pr = m.probabilities({0.3, -1.0, 2.0});
    CHECK(pr[0] + pr[1] == doctest::Approx(1.0));
    CHECK(m.classify({0.3, -1.0, 2.0}) == (pr[1] > pr[0] ? kClasses[1] : kClasses[0]));
}

TEST_CASE("mlp preconditions") {
    LabeledSet one;
    one.x = {{0, 0, 0}};
    one.y = {GlanceRegion::Forward};
    CHECK_THROWS_AS(mlp_train(one, {}, 0), PreconditionError);
    MlpParams bad;
    bad.hidden = 0;
    CHECK_THROWS_AS(mlp_init(kClasses, bad, 0), PreconditionError);
    auto m = mlp_init(kClasses, {}, 0);
    std::vector<double> wrong(3);
    CHECK_THROWS_AS(m.set_parameters(wrong), PreconditionError);
}
