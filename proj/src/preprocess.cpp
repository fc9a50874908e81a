#include "headglance/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "headglance/error.hpp"
#include "headglance/rng.hpp"

namespace headglance {

NormalizationParams fit_normalizer(const Dataset& train) {
    if (train.empty()) throw PreconditionError("fit_normalizer: training set is empty");
    const double n = static_cast<double>(train.size());
    NormalizationParams p;
    for (const auto& s : train.samples()) {
        p.mean[0] += s.rot_x;
        p.mean[1] += s.rot_y;
        p.mean[2] += s.rot_z;
    }
    for (auto& m : p.mean) m /= n;
    std::array<double, 3> ss{};
    for (const auto& s : train.samples()) {
        const std::array<double, 3> v{s.rot_x, s.rot_y, s.rot_z};
        for (int k = 0; k < 3; ++k) ss[k] += (v[k] - p.mean[k]) * (v[k] - p.mean[k]);
    }
    static constexpr std::array<const char*, 3> kNames{"rot_x", "rot_y", "rot_z"};
    for (int k = 0; k < 3; ++k) {
        p.stddev[k] = std::sqrt(ss[k] / n);
        if (!(p.stddev[k] > 0.0)) {
            throw NumericalError(std::string("fit_normalizer: zero variance in ") + kNames[k]);
        }
    }
    return p;
}

Dataset apply_normalizer(const Dataset& ds, const NormalizationParams& p) {
    std::vector<RotationSample> out(ds.samples().begin(), ds.samples().end());
    for (auto& s : out) {
        s.rot_x = (s.rot_x - p.mean[0]) / p.stddev[0];
        s.rot_y = (s.rot_y - p.mean[1]) / p.stddev[1];
        s.rot_z = (s.rot_z - p.mean[2]) / p.stddev[2];
    }
    return Dataset(std::move(out), ds.provenance());
}

void SplitPlan::validate() const {
    if (iterations < 1) throw PreconditionError("split plan: iterations must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw PreconditionError("split plan: train_fraction must lie in (0, 1)");
    }
}

std::size_t train_subject_count(std::size_t n_subjects, double train_fraction) {
    if (n_subjects < 2) throw PreconditionError("subject split needs at least 2 subjects");
    auto k = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n_subjects) + 0.5));
    return std::clamp<std::size_t>(k, 1, n_subjects - 1);
}

SubjectSplit plan_split(const std::vector<std::string>& subjects, const SplitPlan& plan, int iteration) {
    plan.validate();
    const std::size_t n_train = train_subject_count(subjects.size(), plan.train_fraction);
    std::vector<std::string> order = subjects;
    std::sort(order.begin(), order.end());
    auto rng = make_rng(plan.seed, "split", static_cast<std::uint64_t>(iteration));
    // Fisher-Yates with an implementation-independent index draw.
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    SubjectSplit split;
    split.train_subjects.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_subjects.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train_subjects.begin(), split.train_subjects.end());
    std::sort(split.test_subjects.begin(), split.test_subjects.end());
    if (split.train_subjects.empty() || split.test_subjects.empty()) {
        throw PreconditionError("subject split left the train or test set empty");
    }
    return split;
}

TrainTest split_subjects(const Dataset& ds, const SplitPlan& plan, int iteration) {
    const auto split = plan_split(ds.subjects(), plan, iteration);
    return {ds.select_subjects(split.train_subjects), ds.select_subjects(split.test_subjects)};
}

Dataset balance(const Dataset& ds, GlanceRegion class_a, GlanceRegion class_b, std::uint64_t seed) {
    std::vector<std::size_t> idx_a, idx_b;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i].glance == class_a) idx_a.push_back(i);
        if (ds[i].glance == class_b) idx_b.push_back(i);
    }
    if (idx_a.empty() || idx_b.empty()) {
        throw DataError("balance: class '" + std::string(to_string(idx_a.empty() ? class_a : class_b)) +
                        "' is absent");
    }
    auto& major = idx_a.size() >= idx_b.size() ? idx_a : idx_b;
    const std::size_t target = std::min(idx_a.size(), idx_b.size());
    std::vector<char> keep(ds.size(), 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i].glance == class_a || ds[i].glance == class_b) keep[i] = 1;
    }
    if (major.size() > target) {
        // Partial Fisher-Yates: the first `target` entries become the survivors.
        auto rng = make_rng(seed, "balance");
        for (std::size_t i = 0; i < target; ++i) {
            std::swap(major[i], major[i + uniform_index(rng, major.size() - i)]);
        }
        for (std::size_t i = target; i < major.size(); ++i) keep[major[i]] = 0;
    }
    std::vector<RotationSample> out;
    out.reserve(2 * target);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (keep[i]) out.push_back(ds[i]);
    }
    return Dataset(std::move(out), ds.provenance());
}

}  // namespace headglance
