#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

// Per-variable z-score parameters for (rot_x, rot_y, rot_z).
// Population (divide-by-n) standard deviation.
struct NormalizationParams {
    std::array<double, 3> mean{};
    std::array<double, 3> stddev{1.0, 1.0, 1.0};
};

// Throws PreconditionError on empty input and NumericalError on a
// zero-variance variable.
NormalizationParams fit_normalizer(const Dataset& train);
Dataset apply_normalizer(const Dataset& ds, const NormalizationParams& p);

// Monte-Carlo subject-split plan.
struct SplitPlan {
    int iterations = 50;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

// round-half-up(train_fraction * n) clamped to [1, n - 1].
std::size_t train_subject_count(std::size_t n_subjects, double train_fraction);

struct SubjectSplit {
    std::vector<std::string> train_subjects;  // sorted
    std::vector<std::string> test_subjects;   // sorted
};

// Deterministic in (plan.seed, iteration); independent of other iterations.
SubjectSplit plan_split(const std::vector<std::string>& subjects, const SplitPlan& plan, int iteration);

struct TrainTest {
    Dataset train;
    Dataset test;
};

TrainTest split_subjects(const Dataset& ds, const SplitPlan& plan, int iteration);

// Subsamples the majority class (without replacement) down to the minority
// count. Surviving samples keep their original relative order; no field is
// modified. Throws DataError if either class is absent.
Dataset balance(const Dataset& ds, GlanceRegion class_a, GlanceRegion class_b, std::uint64_t seed);

}  // namespace headglance
