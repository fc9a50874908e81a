#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

// Normalised (rot_x, rot_y, rot_z).
using FeatureVector = std::array<double, 3>;
using Label = GlanceRegion;

struct LabeledSet {
    std::vector<FeatureVector> x;
    std::vector<Label> y;

    [[nodiscard]] std::size_t size() const { return x.size(); }
};

LabeledSet to_labeled_set(const Dataset& ds);

// Ordering used wherever a deterministic tie-break between labels is needed.
bool label_less(Label a, Label b);

// Sorted (by label_less) distinct labels present in `y`.
std::vector<Label> distinct_labels(std::span<const Label> y);

// A timestamp-ordered run of same-label samples from one (subject, task) stream.
struct SampleSequence {
    std::string subject_id;
    std::string task_id;
    Label label = GlanceRegion::Forward;
    std::vector<FeatureVector> observations;
};

// Consecutive same-label runs within each (subject, task) stream become one
// sequence each; with max_length > 0, longer runs are cut into consecutive
// blocks of at most max_length. Streams are emitted in order of first
// appearance. Throws PreconditionError if a sample carries a label outside
// the pair.
std::vector<SampleSequence> make_sequences(const Dataset& ds, Label class_a, Label class_b,
                                           std::size_t max_length = 0);

// ---------------------------------------------------------------------------
// k-nearest neighbours (Euclidean, k-d tree search).

struct KnnParams {
    int k = 5;
};

class KnnModel {
public:
    KnnModel() = default;
    // Throws PreconditionError if k is not a positive odd number <= train size.
    KnnModel(LabeledSet train, KnnParams params);

    [[nodiscard]] Label classify(const FeatureVector& q) const;
    // Indices of the k nearest training points, nearest first; distance ties
    // resolve toward the lower index.
    [[nodiscard]] std::vector<std::size_t> neighbours(const FeatureVector& q) const;

    [[nodiscard]] const LabeledSet& train() const { return train_; }
    [[nodiscard]] const KnnParams& params() const { return params_; }

private:
    struct Node {
        std::uint32_t point = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t axis = 0;
    };
    std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi, int depth);

    LabeledSet train_;
    KnnParams params_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

// ---------------------------------------------------------------------------
// Random forest of axis-aligned Gini trees.

struct ForestParams {
    int tree_count = 100;
    int max_depth = 12;
    int min_leaf = 5;
    int features_per_split = 2;
    bool bootstrap = true;
};

struct TreeNode {
    // Internal node when feature >= 0: x[feature] <= threshold goes left.
    int feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t leaf_class = 0;  // index into ForestModel::classes
    std::uint32_t count = 0;        // training samples reaching the node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    [[nodiscard]] std::uint32_t predict(const FeatureVector& x) const;
    [[nodiscard]] int depth() const;
};

struct ForestModel {
    ForestParams params;
    std::uint64_t seed = 0;
    std::vector<Label> classes;
    std::vector<DecisionTree> trees;

    // Per-class vote counts, aligned with `classes`; sums to tree count.
    [[nodiscard]] std::vector<int> votes(const FeatureVector& x) const;
    [[nodiscard]] Label classify(const FeatureVector& x) const;
};

// Throws PreconditionError when fewer than 2 classes are present.
ForestModel forest_train(const LabeledSet& train, const ForestParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Multilayer perceptron: 3 inputs, one logistic hidden layer, 2-way softmax.

struct MlpParams {
    int hidden = 16;
    int batch_size = 32;
    double learning_rate = 0.05;
    int epochs = 200;
    double init_range = 0.5;
};

struct MlpModel {
    MlpParams params;
    std::uint64_t seed = 0;
    std::array<Label, 2> classes{};
    std::vector<double> w1;  // hidden x 3, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // 2 x hidden, row-major
    std::vector<double> b2;  // 2
    std::vector<double> loss_trace;  // mean training cross-entropy seen during each epoch

    [[nodiscard]] std::array<double, 2> probabilities(const FeatureVector& x) const;
    [[nodiscard]] Label classify(const FeatureVector& x) const;

    // Flat parameter view in the order w1, b1, w2, b2.
    [[nodiscard]] std::vector<double> parameters() const;
    void set_parameters(std::span<const double> p);
};

// Randomly initialised, untrained network.
MlpModel mlp_init(std::array<Label, 2> classes, const MlpParams& params, std::uint64_t seed);

// Mean cross-entropy over the given samples, and its gradient with respect
// to parameters() when `grad` is non-null. `target[i]` is 0 or 1.
double mlp_loss(const MlpModel& m, std::span<const FeatureVector> x, std::span<const int> target,
                std::vector<double>* grad = nullptr);

// Mini-batch gradient descent with per-epoch seeded shuffling. Throws
// NumericalError if the loss becomes non-finite.
MlpModel mlp_train(const LabeledSet& train, const MlpParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gaussian hidden Markov model (diagonal covariance), one per class.

struct HmmParams {
    int states = 3;
    int max_iterations = 200;
    double tolerance = 1e-6;  // per-observation log-likelihood improvement
    double variance_floor = 1e-4;
    int max_reinitialisations = 3;
    int max_block_length = 15;  // frames per classified block; 0 = whole runs
};

struct HmmModel {
    Label label = GlanceRegion::Forward;
    std::vector<double> initial;                 // N
    std::vector<std::vector<double>> transition;  // N x N, row-stochastic
    std::vector<FeatureVector> means;            // N
    std::vector<FeatureVector> variances;        // N

    [[nodiscard]] std::size_t states() const { return initial.size(); }
    [[nodiscard]] double log_emission(std::size_t state, const FeatureVector& x) const;
};

struct HmmTrainResult {
    HmmModel model;
    std::vector<double> log_likelihood_trace;  // total log-likelihood before each M-step
    int iterations = 0;
    int reinitialisations = 0;
};

// Baum-Welch EM over all sequences (scaled forward-backward).
HmmTrainResult hmm_train(std::span<const SampleSequence> sequences, Label label, const HmmParams& params,
                         std::uint64_t seed);

// Forward algorithm in log space (log-sum-exp).
double hmm_log_likelihood(const HmmModel& model, std::span<const FeatureVector> observations);

struct HmmClassifier {
    HmmParams params;
    std::uint64_t seed = 0;
    std::vector<HmmModel> models;  // one per class, sorted by label_less

    // Highest forward log-likelihood wins; exact ties go to the label that
    // sorts first. Throws NumericalError if every likelihood is non-finite.
    [[nodiscard]] Label classify(std::span<const FeatureVector> observations) const;
};

HmmClassifier hmm_train_classifier(std::span<const SampleSequence> sequences, const HmmParams& params,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------

using TrainedModel = std::variant<KnnModel, ForestModel, MlpModel, HmmClassifier>;

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);

}  // namespace headglance
