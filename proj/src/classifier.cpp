#include <algorithm>
#include <cmath>

#include "tfs/error.hpp"
#include "tfs/model_zoo.hpp"

namespace tfs {

namespace {

ArchitectureDescriptor describe(const RandomForest& rf) {
    std::size_t depth = 0, nodes = 0;
    for (const DecisionTree& t : rf.trees()) {
        depth = std::max(depth, t.depth());
        nodes += t.nodes().size();
    }
    return {static_cast<double>(ModelFamily::random_forest), static_cast<double>(depth),
            static_cast<double>(rf.trees().size()), std::log10(static_cast<double>(std::max<std::size_t>(nodes, 1))),
            static_cast<double>(kClassCount)};
}

ArchitectureDescriptor describe(const Mlp& net) {
    Eigen::Index width = 0;
    for (std::size_t l = 0; l + 1 < net.layers().size(); ++l) width = std::max(width, net.layers()[l].weights.rows());
    return {static_cast<double>(ModelFamily::mlp), static_cast<double>(net.layers().size() - 1),
            static_cast<double>(width), std::log10(static_cast<double>(net.parameter_count())),
            static_cast<double>(net.outputs())};
}

Label argmax(const std::array<double, kClassCount>& p) {
    return p[1] > p[0] ? Label::malicious : Label::benign;
}

}  // namespace

std::string_view family_name(ModelFamily f) { return f == ModelFamily::random_forest ? "random_forest" : "mlp"; }

ClassifierModel::ClassifierModel(std::vector<Feature> features, RandomForest forest)
    : features_(canonical_order(std::move(features))), state_(std::move(forest)) {
    if (features_.empty()) throw input_error("model needs at least one feature");
    for (const DecisionTree& t : std::get<RandomForest>(state_).trees()) {
        if (t.input_arity() > features_.size()) throw input_error("tree references a feature beyond the model inputs");
    }
    descriptor_ = describe(std::get<RandomForest>(state_));
}

ClassifierModel::ClassifierModel(std::vector<Feature> features, Mlp net, MlpParams params)
    : features_(canonical_order(std::move(features))), state_(std::move(net)), mlp_params_(std::move(params)) {
    if (std::get<Mlp>(state_).inputs() != features_.size()) throw input_error("mlp input width differs from feature count");
    descriptor_ = describe(std::get<Mlp>(state_));
}

ModelFamily ClassifierModel::family() const {
    return std::holds_alternative<RandomForest>(state_) ? ModelFamily::random_forest : ModelFamily::mlp;
}

Prediction ClassifierModel::predict(std::span<const double> x) const {
    if (x.size() != features_.size()) {
        throw input_error("predict: expected " + std::to_string(features_.size()) + " inputs, got " +
                          std::to_string(x.size()));
    }
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
        throw input_error("predict: non-finite input");
    }
    Prediction p;
    p.probabilities = std::visit([&](const auto& m) { return m.probabilities(x); }, state_);
    p.label = argmax(p.probabilities);
    return p;
}

Prediction ClassifierModel::predict(const FlowRecord& r) const {
    std::array<double, kFeatureCount> buf{};
    for (std::size_t i = 0; i < features_.size(); ++i) buf[i] = r[features_[i]];
    return predict(std::span<const double>(buf.data(), features_.size()));
}

ArchitectureDescriptor architecture_descriptor(const ClassifierModel& m) { return m.descriptor(); }

Eigen::MatrixXd feature_matrix(const Dataset& d, const std::vector<Feature>& features) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t c = 0; c < d.size(); ++c) {
        for (std::size_t f = 0; f < features.size(); ++f) {
            x(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c)) = d.rows[c][features[f]];
        }
    }
    return x;
}

}  // namespace tfs
