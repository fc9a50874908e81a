#pragma once

#include <cstdint>
#include <span>

#include "headglance/types.hpp"

namespace headglance {

// Binary confusion counts for a designated positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    [[nodiscard]] std::uint64_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion_from(std::span<const GlanceRegion> predicted, std::span<const GlanceRegion> truth,
                               GlanceRegion positive);

// (tp + tn) / total.
double accuracy(const ConfusionCounts& c);

// Harmonic mean of PPV = tp/(tp+fp) and sensitivity = tp/(tp+fn); 0 when tp = 0.
double f1_score(const ConfusionCounts& c);

// Chance-corrected agreement with the true labels; 0 when chance agreement is 1.
double cohens_kappa(const ConfusionCounts& c);

struct MetricTriple {
    double ac = 0.0;
    double fs = 0.0;
    double kp = 0.0;
};

// All three metrics; throws PreconditionError when the table is empty.
MetricTriple evaluate(const ConfusionCounts& c);

}  // namespace headglance
