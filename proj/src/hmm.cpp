#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"
#include "headglance/rng.hpp"

namespace headglance {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kStarvation = 1e-8;

double log_sum_exp(std::span<const double> v) {
    double mx = kNegInf;
    for (double x : v) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

// Sufficient statistics gathered by one E-step.
struct Accumulators {
    std::vector<double> initial;
    std::vector<std::vector<double>> trans_num;
    std::vector<double> trans_den;  // occupancy over t < T
    std::vector<double> occupancy;  // over all t
    std::vector<FeatureVector> sum_x;
    std::vector<FeatureVector> sum_xx;
    double log_likelihood = 0.0;

    explicit Accumulators(std::size_t n)
        : initial(n, 0.0),
          trans_num(n, std::vector<double>(n, 0.0)),
          trans_den(n, 0.0),
          occupancy(n, 0.0),
          sum_x(n, FeatureVector{}),
          sum_xx(n, FeatureVector{}) {}
};

// Scaled forward-backward for one sequence (Rabiner's scaling).
void e_step(const HmmModel& m, const SampleSequence& seq, Accumulators& acc) {
    const std::size_t n = m.states();
    const std::size_t t_len = seq.observations.size();
    std::vector<std::vector<double>> b(t_len, std::vector<double>(n));
    std::vector<std::vector<double>> alpha(t_len, std::vector<double>(n));
    std::vector<double> scale(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        double mx = kNegInf;
        for (std::size_t i = 0; i < n; ++i) {
            b[t][i] = m.log_emission(i, seq.observations[t]);
            mx = std::max(mx, b[t][i]);
        }
        for (std::size_t i = 0; i < n; ++i) b[t][i] = std::exp(b[t][i] - mx);
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double a = 0.0;
            if (t == 0) {
                a = m.initial[j];
            } else {
                for (std::size_t i = 0; i < n; ++i) a += alpha[t - 1][i] * m.transition[i][j];
            }
            alpha[t][j] = a * b[t][j];
            c += alpha[t][j];
        }
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw NumericalError("HMM forward pass underflowed (zero-probability sequence)");
        }
        for (auto& a : alpha[t]) a /= c;
        scale[t] = c;
        acc.log_likelihood += std::log(c) + mx;
    }

    std::vector<double> beta(n, 1.0), next(n);
    for (std::size_t tt = t_len; tt-- > 0;) {
        // gamma_t = alpha_t * beta_t (already normalised by the scaling).
        for (std::size_t i = 0; i < n; ++i) {
            const double g = alpha[tt][i] * beta[i];
            acc.occupancy[i] += g;
            for (std::size_t k = 0; k < 3; ++k) {
                acc.sum_x[i][k] += g * seq.observations[tt][k];
                acc.sum_xx[i][k] += g * seq.observations[tt][k] * seq.observations[tt][k];
            }
            if (tt == 0) acc.initial[i] += g;
            if (tt + 1 < t_len) acc.trans_den[i] += g;
        }
        if (tt == 0) break;
        // xi_{t-1}(i, j) and beta_{t-1}.
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = m.transition[i][j] * b[tt][j] * beta[j] / scale[tt];
                acc.trans_num[i][j] += alpha[tt - 1][i] * w;
                s += w;
            }
            next[i] = s;
        }
        beta.swap(next);
    }
}

void init_state_from_point(HmmModel& m, std::size_t state, const FeatureVector& point, const FeatureVector& var) {
    m.means[state] = point;
    m.variances[state] = var;
}

}  // namespace

double HmmModel::log_emission(std::size_t state, const FeatureVector& x) const {
    double lp = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double v = variances[state][k];
        const double d = x[k] - means[state][k];
        lp -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + d * d / v);
    }
    return lp;
}

HmmTrainResult hmm_train(std::span<const SampleSequence> sequences, Label label, const HmmParams& params,
                         std::uint64_t seed) {
    if (params.states < 1) throw PreconditionError("hmm_train: state count must be >= 1");
    const auto n = static_cast<std::size_t>(params.states);
    std::vector<const FeatureVector*> all;
    for (const auto& s : sequences) {
        for (const auto& x : s.observations) all.push_back(&x);
    }
    if (sequences.empty() || all.size() < n) {
        throw PreconditionError("hmm_train: need at least one sequence and as many observations as states");
    }

    // Pooled variance for initialisation.
    FeatureVector mean{}, var{};
    for (const auto* x : all)
        for (std::size_t k = 0; k < 3; ++k) mean[k] += (*x)[k];
    for (auto& v : mean) v /= static_cast<double>(all.size());
    for (const auto* x : all)
        for (std::size_t k = 0; k < 3; ++k) var[k] += ((*x)[k] - mean[k]) * ((*x)[k] - mean[k]);
    for (auto& v : var) v = std::max(v / static_cast<double>(all.size()), params.variance_floor);

    auto rng = make_rng(seed, "hmm-init");
    HmmModel m;
    m.label = label;
    m.initial.assign(n, 1.0 / static_cast<double>(n));
    m.transition.assign(n, std::vector<double>(n, n == 1 ? 1.0 : 0.2 / static_cast<double>(n - 1)));
    for (std::size_t i = 0; i < n; ++i) {
        if (n > 1) m.transition[i][i] = 0.8;
    }
    m.means.resize(n);
    m.variances.resize(n);
    for (std::size_t i = 0; i < n; ++i) init_state_from_point(m, i, *all[uniform_index(rng, all.size())], var);

    HmmTrainResult result;
    const double n_obs = static_cast<double>(all.size());
    double prev = kNegInf;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        Accumulators acc(n);
        for (const auto& s : sequences) e_step(m, s, acc);

        bool starved = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (acc.occupancy[i] < kStarvation) {
                if (result.reinitialisations >= params.max_reinitialisations) {
                    throw NumericalError("hmm_train: state " + std::to_string(i) +
                                         " starved after the maximum number of reinitialisations");
                }
                init_state_from_point(m, i, *all[uniform_index(rng, all.size())], var);
                starved = true;
            }
        }
        if (starved) {
            // Monotonicity only holds within an uninterrupted EM run.
            ++result.reinitialisations;
            result.log_likelihood_trace.clear();
            prev = kNegInf;
            continue;
        }

        result.log_likelihood_trace.push_back(acc.log_likelihood);
        result.iterations = iter + 1;
        const double per_obs = acc.log_likelihood / n_obs;
        if (std::isfinite(prev) && per_obs - prev < params.tolerance) break;
        prev = per_obs;

        // M-step.
        double init_total = 0.0;
        for (double v : acc.initial) init_total += v;
        for (std::size_t i = 0; i < n; ++i) {
            m.initial[i] = acc.initial[i] / init_total;
            if (acc.trans_den[i] > 0.0) {
                double row = 0.0;
                for (std::size_t j = 0; j < n; ++j) row += acc.trans_num[i][j];
                for (std::size_t j = 0; j < n; ++j) m.transition[i][j] = acc.trans_num[i][j] / row;
            }
            for (std::size_t k = 0; k < 3; ++k) {
                const double mu = acc.sum_x[i][k] / acc.occupancy[i];
                const double v = acc.sum_xx[i][k] / acc.occupancy[i] - mu * mu;
                m.means[i][k] = mu;
                m.variances[i][k] = std::max(v, params.variance_floor);
            }
        }
    }
    result.model = std::move(m);
    return result;
}

double hmm_log_likelihood(const HmmModel& m, std::span<const FeatureVector> obs) {
    const std::size_t n = m.states();
    if (obs.empty()) return 0.0;
    std::vector<double> log_a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            log_a[i * n + j] = m.transition[i][j] > 0.0 ? std::log(m.transition[i][j]) : kNegInf;
    std::vector<double> alpha(n), next(n), terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = (m.initial[i] > 0.0 ? std::log(m.initial[i]) : kNegInf) + m.log_emission(i, obs[0]);
    }
    for (std::size_t t = 1; t < obs.size(); ++t) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) terms[i] = alpha[i] + log_a[i * n + j];
            next[j] = log_sum_exp(terms) + m.log_emission(j, obs[t]);
        }
        alpha.swap(next);
    }
    return log_sum_exp(alpha);
}

Label HmmClassifier::classify(std::span<const FeatureVector> observations) const {
    if (observations.empty()) throw PreconditionError("hmm_classify: empty sequence");
    const HmmModel* best = nullptr;
    double best_ll = kNegInf;
    for (const auto& m : models) {  // sorted by label, so strict > keeps the first on ties
        const double ll = hmm_log_likelihood(m, observations);
        if (std::isnan(ll)) throw NumericalError("hmm_classify: log-likelihood is NaN");
        if (std::isfinite(ll) && (best == nullptr || ll > best_ll)) {
            best = &m;
            best_ll = ll;
        }
    }
    if (best == nullptr) throw NumericalError("hmm_classify: every class likelihood is non-finite");
    return best->label;
}

HmmClassifier hmm_train_classifier(std::span<const SampleSequence> sequences, const HmmParams& params,
                                   std::uint64_t seed) {
    std::vector<Label> labels;
    for (const auto& s : sequences) labels.push_back(s.label);
    labels = distinct_labels(labels);
    if (labels.size() < 2) throw PreconditionError("hmm_train_classifier: need sequences from at least 2 classes");
    HmmClassifier c;
    c.params = params;
    c.seed = seed;
    for (std::size_t li = 0; li < labels.size(); ++li) {
        std::vector<SampleSequence> own;
        for (const auto& s : sequences) {
            if (s.label == labels[li]) own.push_back(s);
        }
        c.models.push_back(hmm_train(own, labels[li], params, derive_seed(seed, "hmm-class", li)).model);
    }
    return c;
}

}  // namespace headglance
