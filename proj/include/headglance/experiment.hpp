#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "headglance/classifiers.hpp"
#include "headglance/metrics.hpp"
#include "headglance/preprocess.hpp"

namespace headglance {

enum class ClassifierKind { Knn, Forest, Mlp, Hmm };
enum class Condition { Original, Balanced };
enum class NormalizeScope { Train, All };
// Which folds the balanced condition subsamples.
enum class BalanceScope { Train, TrainAndTest };

std::string_view to_string(ClassifierKind k);
std::string_view display_name(ClassifierKind k);  // "k-Nearest Neighbor", ...
std::string_view to_string(Condition c);
std::string_view to_string(NormalizeScope s);
std::string_view to_string(BalanceScope s);
ClassifierKind parse_classifier_kind(std::string_view s);
Condition parse_condition(std::string_view s);
NormalizeScope parse_normalize_scope(std::string_view s);
BalanceScope parse_balance_scope(std::string_view s);

struct ClassifierParams {
    KnnParams knn;
    ForestParams forest;
    MlpParams mlp;
    HmmParams hmm;
};

struct ExperimentOptions {
    NormalizeScope normalize_scope = NormalizeScope::Train;
    BalanceScope balance_scope = BalanceScope::TrainAndTest;
    ClassifierParams params;
    int jobs = 1;
};

// The data one Monte-Carlo iteration hands to a classifier: normalised and,
// for the balanced condition, subsampled.
struct Fold {
    int iteration = 0;
    Dataset train;
    Dataset test;
    GlanceRegion reference = GlanceRegion::Forward;  // negative class
    GlanceRegion target = GlanceRegion::CenterStack;  // positive class
    std::uint64_t seed = 0;                           // classifier seed for this iteration
};

struct FoldPredictions {
    std::vector<Label> predicted;
    std::vector<Label> truth;
};

using FoldPredictor = std::function<FoldPredictions(const Fold&)>;

// Built-in predictor for one of the four classifiers. kNN, forest and MLP
// predict per sample; the HMM predicts one label per sample sequence.
FoldPredictor make_predictor(ClassifierKind kind, const ClassifierParams& params);
std::string_view unit_of_account(ClassifierKind kind);

// Protocol invariants verified on every iteration.
struct InvariantAudit {
    bool split_disjoint = true;
    bool train_normalized = true;  // only meaningful for NormalizeScope::Train
    bool balanced_counts = true;   // only meaningful for Condition::Balanced
    bool confusion_totals = true;  // totals equal the number of test units
    bool metric_recount = true;    // metrics equal a brute-force recount
    double max_train_mean_error = 0.0;
    double max_train_std_error = 0.0;

    [[nodiscard]] bool all() const {
        return split_disjoint && train_normalized && balanced_counts && confusion_totals && metric_recount;
    }
};

struct IterationResult {
    int iteration = 0;
    bool skipped = false;
    std::string skip_reason;
    ConfusionCounts confusion;
    MetricTriple metrics;
    std::size_t train_size = 0;  // samples after balancing
    std::size_t test_units = 0;
};

struct EvaluationReport {
    GlanceRegion reference = GlanceRegion::Forward;
    GlanceRegion target = GlanceRegion::CenterStack;
    std::string classifier;  // to_string(kind), or a caller-chosen name
    Condition condition = Condition::Original;
    SplitPlan plan;
    std::string unit = "samples";
    std::vector<IterationResult> iterations;
    MetricTriple mean;
    std::size_t skipped = 0;
    InvariantAudit audit;

    [[nodiscard]] std::string pair_name() const;
};

// Monte-Carlo evaluation. For every iteration: split subjects, fit the
// normaliser, (balance), train, classify the held-out subjects, score.
// Iterations missing a class in either fold are skipped; more than half
// skipped raises Error. Output is independent of options.jobs.
EvaluationReport run_experiment(const Dataset& ds, GlanceRegion reference, GlanceRegion target,
                                ClassifierKind kind, Condition condition, const SplitPlan& plan,
                                const ExperimentOptions& options = {});

EvaluationReport run_experiment(const Dataset& ds, GlanceRegion reference, GlanceRegion target,
                                const FoldPredictor& predictor, std::string classifier_name,
                                std::string unit, Condition condition, const SplitPlan& plan,
                                const ExperimentOptions& options = {});

// One run_experiment per (region, classifier, condition), in that nesting order.
std::vector<EvaluationReport> eccentricity_sweep(const Dataset& ds, GlanceRegion reference,
                                                 const std::vector<GlanceRegion>& regions,
                                                 const std::vector<ClassifierKind>& classifiers,
                                                 const std::vector<Condition>& conditions, const SplitPlan& plan,
                                                 const ExperimentOptions& options = {});

// Report CSV: classifier,pair,condition,iteration,AC,FS,KP plus a "mean" row
// per report.
void write_report_csv(std::ostream& out, const std::vector<EvaluationReport>& reports);

// Classifier x {original, balanced} x {AC, FS, KP} grid, one block per pair.
void write_summary_table(std::ostream& out, const std::vector<EvaluationReport>& reports);
void write_summary_csv(std::ostream& out, const std::vector<EvaluationReport>& reports);

}  // namespace headglance
