#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tfs/features.hpp"
#include "tfs/flow_data.hpp"

namespace tfs {

enum class ModelFamily : int { random_forest = 0, mlp = 1 };

std::string_view family_name(ModelFamily f);

/// [family code, depth, width, log10(parameter count), output classes].
/// Depth is the deepest tree or the number of hidden layers; width is the
/// number of trees or the widest hidden layer.
using ArchitectureDescriptor = std::array<double, 5>;

struct Prediction {
    Label label = Label::benign;
    std::array<double, kClassCount> probabilities{};
};

// ---------------------------------------------------------------------------
// Random forest

struct RandomForestParams {
    std::size_t n_estimators = 200;
    std::optional<std::size_t> max_depth;  ///< unlimited when empty
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 0;
};

struct TreeNode {
    /// Input column compared at this node, or -1 for a leaf.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;   ///< taken when x[feature] <= threshold
    int right = -1;
    Label leaf_label = Label::benign;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    /// Node 0 is the root. Throws input_error on malformed topology.
    explicit DecisionTree(std::vector<TreeNode> nodes);

    /// A single leaf.
    static DecisionTree constant(Label label);
    /// One split: x[feature] <= threshold ? low : high.
    static DecisionTree stump(int feature, double threshold, Label low, Label high);

    Label predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t input_arity() const;  ///< 1 + largest feature index used
    const std::vector<TreeNode>& nodes() const { return nodes_; }

private:
    std::vector<TreeNode> nodes_;
};

class RandomForest {
public:
    RandomForest(RandomForestParams params, std::vector<DecisionTree> trees);

    /// Fraction of trees voting for each class.
    std::array<double, kClassCount> probabilities(std::span<const double> x) const;

    const RandomForestParams& params() const { return params_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

private:
    RandomForestParams params_;
    std::vector<DecisionTree> trees_;
};

// ---------------------------------------------------------------------------
// Multilayer perceptron

struct MlpParams {
    std::vector<std::size_t> hidden_layers{128, 128, 128};
    double dropout_rate = 0.2;
    double learning_rate = 0.001;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DenseLayer {
    Eigen::MatrixXd weights;  ///< outputs x inputs
    Eigen::VectorXd bias;
};

/// ReLU hidden layers, softmax output. Batches are column-major: one sample
/// per column.
class Mlp {
public:
    using Gradients = std::vector<DenseLayer>;

    /// Glorot-uniform weights, zero biases.
    Mlp(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, std::uint64_t seed);
    explicit Mlp(std::vector<DenseLayer> layers);

    std::size_t inputs() const { return static_cast<std::size_t>(layers_.front().weights.cols()); }
    std::size_t outputs() const { return static_cast<std::size_t>(layers_.back().weights.rows()); }
    std::size_t parameter_count() const;

    /// Softmax outputs, one column per sample.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
    std::array<double, kClassCount> probabilities(std::span<const double> x) const;

    /// Mean sparse cross-entropy over the batch.
    double loss(const Eigen::MatrixXd& x, std::span<const int> y) const;

    /// Loss gradient with respect to every weight and bias. With a nonzero
    /// dropout rate and an rng, inverted dropout is applied after each hidden
    /// layer. Returns the batch loss.
    double gradients(const Eigen::MatrixXd& x, std::span<const int> y, Gradients& out,
                     double dropout_rate = 0.0, std::mt19937_64* rng = nullptr) const;

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

private:
    std::vector<DenseLayer> layers_;
};

/// Adam with beta1 = 0.9, beta2 = 0.999, epsilon = 1e-7.
class AdamOptimizer {
public:
    AdamOptimizer(const Mlp& net, double learning_rate);
    void step(Mlp& net, const Mlp::Gradients& grads);

private:
    double lr_;
    std::size_t t_ = 0;
    std::vector<DenseLayer> m_, v_;
};

// ---------------------------------------------------------------------------
// Uniform model wrapper

class ClassifierModel {
public:
    ClassifierModel(std::vector<Feature> features, RandomForest forest);
    ClassifierModel(std::vector<Feature> features, Mlp net, MlpParams params);

    ModelFamily family() const;
    const std::vector<Feature>& features() const { return features_; }
    FeatureSet feature_set() const { return FeatureSet(features_); }

    /// `x` holds exactly one value per model feature, in model order.
    Prediction predict(std::span<const double> x) const;
    /// Selects the model's features from a full record.
    Prediction predict(const FlowRecord& r) const;

    const ArchitectureDescriptor& descriptor() const { return descriptor_; }

    const RandomForest* forest() const { return std::get_if<RandomForest>(&state_); }
    const Mlp* mlp() const { return std::get_if<Mlp>(&state_); }
    const MlpParams* mlp_params() const { return mlp_params_ ? &*mlp_params_ : nullptr; }

private:
    std::vector<Feature> features_;
    std::variant<RandomForest, Mlp> state_;
    std::optional<MlpParams> mlp_params_;
    ArchitectureDescriptor descriptor_{};
};

/// CART trees (Gini impurity) on bootstrap samples, sqrt(#features) candidate
/// features per split.
ClassifierModel train_random_forest(const Dataset& train, std::vector<Feature> features,
                                    const RandomForestParams& params);

/// Mini-batch Adam on sparse cross-entropy. Inputs must lie in [0, 1].
ClassifierModel train_mlp(const Dataset& train, std::vector<Feature> features, const MlpParams& params);

ArchitectureDescriptor architecture_descriptor(const ClassifierModel& m);

/// Gathers the listed features of every row into a column-major batch.
Eigen::MatrixXd feature_matrix(const Dataset& d, const std::vector<Feature>& features);

}  // namespace tfs
