#include <algorithm>
#include <cmath>
#include <numeric>

#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"
#include "headglance/rng.hpp"

namespace headglance {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Forward {
    std::vector<double> hidden;
    std::array<double, 2> prob{};
};

void forward(const MlpModel& m, const FeatureVector& x, Forward& out) {
    const auto h = static_cast<std::size_t>(m.params.hidden);
    out.hidden.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
        double z = m.b1[j];
        for (std::size_t k = 0; k < 3; ++k) z += m.w1[j * 3 + k] * x[k];
        out.hidden[j] = logistic(z);
    }
    std::array<double, 2> logits{};
    for (std::size_t o = 0; o < 2; ++o) {
        double z = m.b2[o];
        for (std::size_t j = 0; j < h; ++j) z += m.w2[o * h + j] * out.hidden[j];
        logits[o] = z;
    }
    const double mx = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - mx), e1 = std::exp(logits[1] - mx);
    out.prob = {e0 / (e0 + e1), e1 / (e0 + e1)};
}

// Accumulates the summed (not averaged) loss and gradient for one sample.
double accumulate(const MlpModel& m, const FeatureVector& x, int target, Forward& f, std::vector<double>& grad) {
    forward(m, x, f);
    const auto h = static_cast<std::size_t>(m.params.hidden);
    const std::size_t off_b1 = h * 3, off_w2 = off_b1 + h, off_b2 = off_w2 + 2 * h;
    std::array<double, 2> dz{f.prob[0], f.prob[1]};
    dz[static_cast<std::size_t>(target)] -= 1.0;
    for (std::size_t o = 0; o < 2; ++o) {
        grad[off_b2 + o] += dz[o];
        for (std::size_t j = 0; j < h; ++j) grad[off_w2 + o * h + j] += dz[o] * f.hidden[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
        const double dh = dz[0] * m.w2[j] + dz[1] * m.w2[h + j];
        const double da = dh * f.hidden[j] * (1.0 - f.hidden[j]);
        grad[off_b1 + j] += da;
        for (std::size_t k = 0; k < 3; ++k) grad[j * 3 + k] += da * x[k];
    }
    return -std::log(std::max(f.prob[static_cast<std::size_t>(target)], 1e-300));
}

}  // namespace

std::array<double, 2> MlpModel::probabilities(const FeatureVector& x) const {
    Forward f;
    forward(*this, x, f);
    return f.prob;
}

Label MlpModel::classify(const FeatureVector& x) const {
    const auto p = probabilities(x);
    return p[1] > p[0] ? classes[1] : classes[0];
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> p;
    p.reserve(w1.size() + b1.size() + w2.size() + b2.size());
    p.insert(p.end(), w1.begin(), w1.end());
    p.insert(p.end(), b1.begin(), b1.end());
    p.insert(p.end(), w2.begin(), w2.end());
    p.insert(p.end(), b2.begin(), b2.end());
    return p;
}

void MlpModel::set_parameters(std::span<const double> p) {
    if (p.size() != w1.size() + b1.size() + w2.size() + b2.size()) {
        throw PreconditionError("MlpModel::set_parameters: size mismatch");
    }
    auto it = p.begin();
    for (auto* v : {&w1, &b1, &w2, &b2}) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
        it += static_cast<std::ptrdiff_t>(v->size());
    }
}

MlpModel mlp_init(std::array<Label, 2> classes, const MlpParams& params, std::uint64_t seed) {
    if (params.hidden < 1) throw PreconditionError("MLP: hidden layer needs at least one unit");
    MlpModel m;
    m.params = params;
    m.seed = seed;
    m.classes = classes;
    const auto h = static_cast<std::size_t>(params.hidden);
    m.w1.resize(h * 3);
    m.b1.resize(h);
    m.w2.resize(2 * h);
    m.b2.resize(2);
    auto rng = make_rng(seed, "mlp-init");
    for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2}) {
        for (auto& w : *v) w = params.init_range * (2.0 * uniform01(rng) - 1.0);
    }
    return m;
}

double mlp_loss(const MlpModel& m, std::span<const FeatureVector> x, std::span<const int> target,
                std::vector<double>* grad) {
    std::vector<double> g(m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size(), 0.0);
    Forward f;
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) loss += accumulate(m, x[i], target[i], f, g);
    const double n = static_cast<double>(x.size());
    if (grad) {
        for (auto& v : g) v /= n;
        *grad = std::move(g);
    }
    return loss / n;
}

MlpModel mlp_train(const LabeledSet& train, const MlpParams& params, std::uint64_t seed) {
    const auto labels = distinct_labels(train.y);
    if (labels.size() != 2) throw PreconditionError("mlp_train: exactly two classes are required");
    if (params.batch_size < 1 || params.epochs < 0) throw PreconditionError("mlp_train: invalid schedule");
    MlpModel m = mlp_init({labels[0], labels[1]}, params, seed);

    const std::size_t n = train.size();
    std::vector<int> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = train.y[i] == labels[1] ? 1 : 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> params_flat = m.parameters();
    std::vector<double> grad(params_flat.size());
    Forward f;
    const auto batch = static_cast<std::size_t>(params.batch_size);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        auto rng = make_rng(seed, "mlp-epoch", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
        double epoch_loss = 0.0;  // running mean over the epoch's mini-batches
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = start; b < end; ++b) {
                epoch_loss += accumulate(m, train.x[order[b]], target[order[b]], f, grad);
            }
            const double step = params.learning_rate / static_cast<double>(end - start);
            for (std::size_t p = 0; p < params_flat.size(); ++p) params_flat[p] -= step * grad[p];
            m.set_parameters(params_flat);
        }
        const double loss = epoch_loss / static_cast<double>(n);
        if (!std::isfinite(loss)) {
            throw NumericalError("MLP training diverged (loss is not finite); lower the learning rate");
        }
        m.loss_trace.push_back(loss);
    }
    return m;
}

}  // namespace headglance
