#include "headglance/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "headglance/dataset_io.hpp"
#include "headglance/error.hpp"
#include "headglance/rng.hpp"

namespace headglance {

namespace {

constexpr double kNormTolerance = 1e-9;
constexpr double kRecountTolerance = 1e-12;

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<E>(i);
    }
    throw DataError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 4> kClassifierNames{"knn", "forest", "mlp", "hmm"};
constexpr std::array<std::string_view, 4> kClassifierDisplay{"k-Nearest Neighbor", "Random Forest",
                                                             "Multilayer Perceptron", "Hidden Markov Model"};
constexpr std::array<std::string_view, 2> kConditionNames{"original", "balanced"};
constexpr std::array<std::string_view, 2> kNormalizeNames{"train", "all"};
constexpr std::array<std::string_view, 2> kBalanceNames{"train", "train_and_test"};

// Independent recount of the three metrics straight from the label lists.
bool recount_matches(const FoldPredictions& p, GlanceRegion positive, const MetricTriple& m) {
    const double n = static_cast<double>(p.truth.size());
    double correct = 0, pred_pos = 0, true_pos = 0, both = 0;
    for (std::size_t i = 0; i < p.truth.size(); ++i) {
        const bool a = p.predicted[i] == positive, b = p.truth[i] == positive;
        correct += (a == b) ? 1 : 0;
        pred_pos += a ? 1 : 0;
        true_pos += b ? 1 : 0;
        both += (a && b) ? 1 : 0;
    }
    const double ac = correct / n;
    const double fp = pred_pos - both, fn = true_pos - both;
    const double fs = both == 0 ? 0.0 : 2.0 * both / (2.0 * both + fp + fn);
    const double pe = (pred_pos / n) * (true_pos / n) + (1.0 - pred_pos / n) * (1.0 - true_pos / n);
    const double kp = pe >= 1.0 ? 0.0 : (ac - pe) / (1.0 - pe);
    return std::abs(ac - m.ac) <= kRecountTolerance && std::abs(fs - m.fs) <= kRecountTolerance &&
           std::abs(kp - m.kp) <= kRecountTolerance;
}

struct IterationOutcome {
    IterationResult result;
    InvariantAudit audit;
};

IterationOutcome run_iteration(const Dataset& filtered, GlanceRegion reference, GlanceRegion target,
                               const FoldPredictor& predictor, bool sequence_unit, Condition condition,
                               const SplitPlan& plan, const ExperimentOptions& options,
                               const NormalizationParams* global_norm, int it) {
    IterationOutcome out;
    auto& r = out.result;
    auto& audit = out.audit;
    r.iteration = it;

    auto [train, test] = split_subjects(filtered, plan, it);
    for (const auto& s : train.subjects()) {
        if (std::binary_search(test.subjects().begin(), test.subjects().end(), s)) audit.split_disjoint = false;
    }

    if (train.count(reference) == 0 || train.count(target) == 0) {
        r.skipped = true;
        r.skip_reason = "class absent from training fold";
        return out;
    }
    if (test.count(reference) == 0 || test.count(target) == 0) {
        r.skipped = true;
        r.skip_reason = "class absent from test fold";
        return out;
    }

    const NormalizationParams norm = global_norm ? *global_norm : fit_normalizer(train);
    Dataset train_n = apply_normalizer(train, norm);
    Dataset test_n = apply_normalizer(test, norm);

    if (options.normalize_scope == NormalizeScope::Train) {
        const auto check = fit_normalizer(train_n);
        for (int k = 0; k < 3; ++k) {
            audit.max_train_mean_error = std::max(audit.max_train_mean_error, std::abs(check.mean[k]));
            audit.max_train_std_error = std::max(audit.max_train_std_error, std::abs(check.stddev[k] - 1.0));
        }
        audit.train_normalized =
            audit.max_train_mean_error <= kNormTolerance && audit.max_train_std_error <= kNormTolerance;
    }

    if (condition == Condition::Balanced) {
        train_n = balance(train_n, reference, target, derive_seed(plan.seed, "balance-train", static_cast<std::uint64_t>(it)));
        if (train_n.count(reference) != train_n.count(target)) audit.balanced_counts = false;
        if (options.balance_scope == BalanceScope::TrainAndTest) {
            test_n = balance(test_n, reference, target, derive_seed(plan.seed, "balance-test", static_cast<std::uint64_t>(it)));
            if (test_n.count(reference) != test_n.count(target)) audit.balanced_counts = false;
        }
    }

    const std::size_t expected_units =
        sequence_unit ? make_sequences(test_n, reference, target,
                                      static_cast<std::size_t>(options.params.hmm.max_block_length)).size() : test_n.size();

    Fold fold{it, std::move(train_n), std::move(test_n), reference, target,
              derive_seed(plan.seed, "classifier", static_cast<std::uint64_t>(it))};
    const auto pred = predictor(fold);
    if (pred.predicted.size() != pred.truth.size()) throw Error("predictor returned mismatched label lists");

    r.train_size = fold.train.size();
    r.test_units = pred.truth.size();
    r.confusion = confusion_from(pred.predicted, pred.truth, target);
    r.metrics = evaluate(r.confusion);
    audit.confusion_totals = r.confusion.total() == expected_units && r.confusion.total() == pred.truth.size();
    audit.metric_recount = recount_matches(pred, target, r.metrics);
    return out;
}

}  // namespace

std::string_view to_string(ClassifierKind k) { return kClassifierNames.at(static_cast<std::size_t>(k)); }
std::string_view display_name(ClassifierKind k) { return kClassifierDisplay.at(static_cast<std::size_t>(k)); }
std::string_view to_string(Condition c) { return kConditionNames.at(static_cast<std::size_t>(c)); }
std::string_view to_string(NormalizeScope s) { return kNormalizeNames.at(static_cast<std::size_t>(s)); }
std::string_view to_string(BalanceScope s) { return kBalanceNames.at(static_cast<std::size_t>(s)); }
ClassifierKind parse_classifier_kind(std::string_view s) {
    return parse_enum<ClassifierKind>(s, kClassifierNames, "classifier");
}
Condition parse_condition(std::string_view s) { return parse_enum<Condition>(s, kConditionNames, "condition"); }
NormalizeScope parse_normalize_scope(std::string_view s) {
    return parse_enum<NormalizeScope>(s, kNormalizeNames, "normalize scope");
}
BalanceScope parse_balance_scope(std::string_view s) {
    return parse_enum<BalanceScope>(s, kBalanceNames, "balance scope");
}

std::string_view unit_of_account(ClassifierKind kind) { return kind == ClassifierKind::Hmm ? "sequences" : "samples"; }

FoldPredictor make_predictor(ClassifierKind kind, const ClassifierParams& params) {
    switch (kind) {
        case ClassifierKind::Knn:
            return [p = params.knn](const Fold& f) {
                const KnnModel model(to_labeled_set(f.train), p);
                FoldPredictions out;
                for (const auto& s : f.test.samples()) {
                    out.predicted.push_back(model.classify({s.rot_x, s.rot_y, s.rot_z}));
                    out.truth.push_back(s.glance);
                }
                return out;
            };
        case ClassifierKind::Forest:
            return [p = params.forest](const Fold& f) {
                const auto model = forest_train(to_labeled_set(f.train), p, f.seed);
                FoldPredictions out;
                for (const auto& s : f.test.samples()) {
                    out.predicted.push_back(model.classify({s.rot_x, s.rot_y, s.rot_z}));
                    out.truth.push_back(s.glance);
                }
                return out;
            };
        case ClassifierKind::Mlp:
            return [p = params.mlp](const Fold& f) {
                const auto model = mlp_train(to_labeled_set(f.train), p, f.seed);
                FoldPredictions out;
                for (const auto& s : f.test.samples()) {
                    out.predicted.push_back(model.classify({s.rot_x, s.rot_y, s.rot_z}));
                    out.truth.push_back(s.glance);
                }
                return out;
            };
        case ClassifierKind::Hmm:
            return [p = params.hmm](const Fold& f) {
                const auto train_seq = make_sequences(f.train, f.reference, f.target, static_cast<std::size_t>(p.max_block_length));
                const auto model = hmm_train_classifier(train_seq, p, f.seed);
                FoldPredictions out;
                for (const auto& q : make_sequences(f.test, f.reference, f.target, static_cast<std::size_t>(p.max_block_length))) {
                    out.predicted.push_back(model.classify(q.observations));
                    out.truth.push_back(q.label);
                }
                return out;
            };
    }
    throw PreconditionError("unknown classifier kind");
}

std::string EvaluationReport::pair_name() const {
    return std::string(headglance::to_string(reference)) + "/" + std::string(headglance::to_string(target));
}

EvaluationReport run_experiment(const Dataset& ds, GlanceRegion reference, GlanceRegion target, ClassifierKind kind,
                                Condition condition, const SplitPlan& plan, const ExperimentOptions& options) {
    return run_experiment(ds, reference, target, make_predictor(kind, options.params), std::string(to_string(kind)),
                          std::string(unit_of_account(kind)), condition, plan, options);
}

EvaluationReport run_experiment(const Dataset& ds, GlanceRegion reference, GlanceRegion target,
                                const FoldPredictor& predictor, std::string classifier_name, std::string unit,
                                Condition condition, const SplitPlan& plan, const ExperimentOptions& options) {
    plan.validate();
    const Dataset filtered = filter_binary(ds, reference, target);
    if (filtered.count(reference) == 0 || filtered.count(target) == 0) {
        throw DataError("run_experiment: dataset lacks samples of '" +
                        std::string(to_string(filtered.count(reference) == 0 ? reference : target)) + "'");
    }
    std::optional<NormalizationParams> global_norm;
    if (options.normalize_scope == NormalizeScope::All) global_norm = fit_normalizer(filtered);
    const bool sequence_unit = unit == "sequences";

    const auto n_iter = static_cast<std::size_t>(plan.iterations);
    std::vector<IterationOutcome> outcomes(n_iter);
    std::vector<std::exception_ptr> errors(n_iter);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_iter; i = next++) {
            try {
                outcomes[i] = run_iteration(filtered, reference, target, predictor, sequence_unit, condition, plan,
                                            options, global_norm ? &*global_norm : nullptr, static_cast<int>(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto jobs = static_cast<std::size_t>(std::clamp(options.jobs, 1, static_cast<int>(n_iter)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    EvaluationReport report;
    report.reference = reference;
    report.target = target;
    report.classifier = std::move(classifier_name);
    report.condition = condition;
    report.plan = plan;
    report.unit = std::move(unit);
    std::size_t used = 0;
    for (auto& o : outcomes) {
        auto& a = report.audit;
        a.split_disjoint = a.split_disjoint && o.audit.split_disjoint;
        a.train_normalized = a.train_normalized && o.audit.train_normalized;
        a.balanced_counts = a.balanced_counts && o.audit.balanced_counts;
        a.confusion_totals = a.confusion_totals && o.audit.confusion_totals;
        a.metric_recount = a.metric_recount && o.audit.metric_recount;
        a.max_train_mean_error = std::max(a.max_train_mean_error, o.audit.max_train_mean_error);
        a.max_train_std_error = std::max(a.max_train_std_error, o.audit.max_train_std_error);
        if (o.result.skipped) {
            ++report.skipped;
        } else {
            report.mean.ac += o.result.metrics.ac;
            report.mean.fs += o.result.metrics.fs;
            report.mean.kp += o.result.metrics.kp;
            ++used;
        }
        report.iterations.push_back(std::move(o.result));
    }
    if (2 * report.skipped > n_iter) {
        throw Error("experiment " + report.classifier + " " + report.pair_name() + ": " +
                    std::to_string(report.skipped) + " of " + std::to_string(n_iter) +
                    " iterations skipped (more than half)");
    }
    report.mean.ac /= static_cast<double>(used);
    report.mean.fs /= static_cast<double>(used);
    report.mean.kp /= static_cast<double>(used);
    return report;
}

std::vector<EvaluationReport> eccentricity_sweep(const Dataset& ds, GlanceRegion reference,
                                                 const std::vector<GlanceRegion>& regions,
                                                 const std::vector<ClassifierKind>& classifiers,
                                                 const std::vector<Condition>& conditions, const SplitPlan& plan,
                                                 const ExperimentOptions& options) {
    std::vector<EvaluationReport> out;
    for (auto region : regions) {
        for (auto kind : classifiers) {
            for (auto cond : conditions) out.push_back(run_experiment(ds, reference, region, kind, cond, plan, options));
        }
    }
    return out;
}

void write_report_csv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
    out << "classifier,pair,condition,iteration,AC,FS,KP\n";
    for (const auto& r : reports) {
        const std::string prefix = r.classifier + "," + r.pair_name() + "," + std::string(to_string(r.condition)) + ",";
        for (const auto& it : r.iterations) {
            out << prefix << it.iteration << ',';
            if (it.skipped) {
                out << "NA,NA,NA\n";
            } else {
                out << format_fixed(it.metrics.ac) << ',' << format_fixed(it.metrics.fs) << ','
                    << format_fixed(it.metrics.kp) << '\n';
            }
        }
        out << prefix << "mean," << format_fixed(r.mean.ac) << ',' << format_fixed(r.mean.fs) << ','
            << format_fixed(r.mean.kp) << '\n';
    }
}

namespace {

// pair -> classifier (first-seen order) -> condition -> report
struct SummaryGrid {
    std::vector<std::string> pairs;
    std::map<std::string, std::vector<std::string>> classifiers;
    std::map<std::tuple<std::string, std::string, Condition>, const EvaluationReport*> cells;

    explicit SummaryGrid(const std::vector<EvaluationReport>& reports) {
        for (const auto& r : reports) {
            const auto pair = r.pair_name();
            if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end()) pairs.push_back(pair);
            auto& cls = classifiers[pair];
            if (std::find(cls.begin(), cls.end(), r.classifier) == cls.end()) cls.push_back(r.classifier);
            cells[{pair, r.classifier, r.condition}] = &r;
        }
    }

    const EvaluationReport* at(const std::string& pair, const std::string& cls, Condition c) const {
        auto it = cells.find({pair, cls, c});
        return it == cells.end() ? nullptr : it->second;
    }
};

std::string classifier_label(const std::string& name) {
    for (std::size_t i = 0; i < kClassifierNames.size(); ++i) {
        if (kClassifierNames[i] == name) return std::string(kClassifierDisplay[i]);
    }
    return name;
}

}  // namespace

void write_summary_table(std::ostream& out, const std::vector<EvaluationReport>& reports) {
    const SummaryGrid grid(reports);
    std::ostringstream line;
    line << std::left;
    auto flush = [&] {
        auto text = line.str();
        text.erase(text.find_last_not_of(' ') + 1);
        out << text << '\n';
        line.str({});
    };
    for (const auto& pair : grid.pairs) {
        out << pair << '\n';
        line << std::setw(24) << "" << std::setw(33) << "Original Dataset" << "Balanced Dataset";
        flush();
        line << std::setw(24) << "";
        for (int c = 0; c < 2; ++c) line << std::setw(11) << "AC" << std::setw(11) << "FS" << std::setw(11) << "KP";
        flush();
        for (const auto& cls : grid.classifiers.at(pair)) {
            line << std::setw(24) << classifier_label(cls);
            for (auto cond : {Condition::Original, Condition::Balanced}) {
                const auto* r = grid.at(pair, cls, cond);
                for (double v : {r ? r->mean.ac : NAN, r ? r->mean.fs : NAN, r ? r->mean.kp : NAN}) {
                    line << std::setw(11) << (r ? format_fixed(v) : std::string("-"));
                }
            }
            flush();
        }
        out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
    const SummaryGrid grid(reports);
    out << "pair,classifier,original_AC,original_FS,original_KP,balanced_AC,balanced_FS,balanced_KP\n";
    for (const auto& pair : grid.pairs) {
        for (const auto& cls : grid.classifiers.at(pair)) {
            out << pair << ',' << cls;
            for (auto cond : {Condition::Original, Condition::Balanced}) {
                const auto* r = grid.at(pair, cls, cond);
                if (r) {
                    out << ',' << format_fixed(r->mean.ac) << ',' << format_fixed(r->mean.fs) << ','
                        << format_fixed(r->mean.kp);
                } else {
                    out << ",NA,NA,NA";
                }
            }
            out << '\n';
        }
    }
}

}  // namespace headglance
