#include "headglance/metrics.hpp"

#include "headglance/error.hpp"

namespace headglance {

namespace {

void require_nonempty(const ConfusionCounts& c) {
    if (c.total() == 0) throw PreconditionError("confusion table is empty");
}

}  // namespace

ConfusionCounts confusion_from(std::span<const GlanceRegion> predicted, std::span<const GlanceRegion> truth,
                               GlanceRegion positive) {
    if (predicted.size() != truth.size()) throw PreconditionError("prediction and truth lengths differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == positive;
        const bool t = truth[i] == positive;
        if (p && t) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (t) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    require_nonempty(c);
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double f1_score(const ConfusionCounts& c) {
    require_nonempty(c);
    if (c.tp == 0) return 0.0;
    const double ppv = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double sens = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return 2.0 * ppv * sens / (ppv + sens);
}

double cohens_kappa(const ConfusionCounts& c) {
    require_nonempty(c);
    const double n = static_cast<double>(c.total());
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
    const double observed = (tp + tn) / n;
    const double chance = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n);
    if (chance >= 1.0) return 0.0;
    return (observed - chance) / (1.0 - chance);
}

MetricTriple evaluate(const ConfusionCounts& c) { return {accuracy(c), f1_score(c), cohens_kappa(c)}; }

}  // namespace headglance
