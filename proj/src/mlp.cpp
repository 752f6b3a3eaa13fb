#include <algorithm>
#include <cmath>
#include <numeric>

#include "tfs/error.hpp"
#include "tfs/model_zoo.hpp"

namespace tfs {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-7;

/// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double top = logits.col(c).maxCoeff();
        const double lse = top + std::log((logits.col(c).array() - top).exp().sum());
        out.col(c) = logits.col(c).array() - lse;
    }
    return out;
}

void check_labels(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t outputs) {
    if (static_cast<std::size_t>(x.cols()) != y.size()) throw input_error("mlp: batch and label counts differ");
    for (int label : y) {
        if (label < 0 || static_cast<std::size_t>(label) >= outputs) throw input_error("mlp: label out of range");
    }
}

}  // namespace

void MlpParams::validate() const {
    if (hidden_layers.empty()) throw input_error("mlp: at least one hidden layer is required");
    for (std::size_t w : hidden_layers) {
        if (w < 1) throw input_error("mlp: hidden layer widths must be >= 1");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw input_error("mlp: dropout rate must lie in [0, 1)");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw input_error("mlp: learning rate must be > 0");
    if (epochs < 1) throw input_error("mlp: epochs must be >= 1");
    if (batch_size < 1) throw input_error("mlp: batch size must be >= 1");
}

Mlp::Mlp(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, std::uint64_t seed) {
    if (inputs < 1 || outputs < 2) throw input_error("mlp: needs >= 1 input and >= 2 outputs");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> widths{inputs};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(outputs);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(widths[l]);
        const auto fan_out = static_cast<Eigen::Index>(widths[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) layer.weights(r, c) = u(rng);
        }
        layers_.push_back(std::move(layer));
    }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.size() < 2) throw input_error("mlp: needs at least one hidden layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].bias.size() != layers_[l].weights.rows()) throw input_error("mlp: bias/weight shape mismatch");
        if (l > 0 && layers_[l].weights.cols() != layers_[l - 1].weights.rows()) {
            throw input_error("mlp: consecutive layer shapes do not chain");
        }
    }
    if (outputs() != kClassCount) throw input_error("mlp: output layer must have 2 units");
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.rows()) != inputs()) throw input_error("mlp: input arity mismatch");
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = (layers_[l].weights * a).colwise() + layers_[l].bias;
        a = l + 1 < layers_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : Eigen::MatrixXd(log_softmax(z).array().exp());
    }
    return a;
}

std::array<double, kClassCount> Mlp::probabilities(std::span<const double> x) const {
    Eigen::Map<const Eigen::VectorXd> col(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::MatrixXd p = forward(col);
    return {p(0, 0), p(1, 0)};
}

double Mlp::loss(const Eigen::MatrixXd& x, std::span<const int> y) const {
    check_labels(x, y, outputs());
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        a = ((layers_[l].weights * a).colwise() + layers_[l].bias).cwiseMax(0.0);
    }
    const Eigen::MatrixXd logp = log_softmax((layers_.back().weights * a).colwise() + layers_.back().bias);
    double total = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) total -= logp(y[c], static_cast<Eigen::Index>(c));
    return total / static_cast<double>(y.size());
}

double Mlp::gradients(const Eigen::MatrixXd& x, std::span<const int> y, Gradients& out, double dropout_rate,
                      std::mt19937_64* rng) const {
    check_labels(x, y, outputs());
    if (static_cast<std::size_t>(x.rows()) != inputs()) throw input_error("mlp: input arity mismatch");
    const std::size_t L = layers_.size();
    const double batch = static_cast<double>(y.size());
    const bool dropout = dropout_rate > 0.0 && rng != nullptr;

    // activations[l] feeds layer l; masks[l] scales hidden layer l's output.
    std::vector<Eigen::MatrixXd> activations(L);
    std::vector<Eigen::MatrixXd> masks(L - 1);
    activations[0] = x;
    std::bernoulli_distribution keep(1.0 - dropout_rate);
    for (std::size_t l = 0; l + 1 < L; ++l) {
        Eigen::MatrixXd h = ((layers_[l].weights * activations[l]).colwise() + layers_[l].bias).cwiseMax(0.0);
        masks[l] = (h.array() > 0.0).cast<double>();
        if (dropout) {
            const double scale = 1.0 / (1.0 - dropout_rate);
            for (Eigen::Index i = 0; i < h.size(); ++i) {
                const double m = keep(*rng) ? scale : 0.0;
                masks[l].data()[i] *= m;
                h.data()[i] *= m;
            }
        }
        activations[l + 1] = std::move(h);
    }
    const Eigen::MatrixXd logp =
        log_softmax((layers_.back().weights * activations[L - 1]).colwise() + layers_.back().bias);

    double total = 0.0;
    Eigen::MatrixXd delta = logp.array().exp();
    for (std::size_t c = 0; c < y.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        total -= logp(y[c], col);
        delta(y[c], col) -= 1.0;
    }
    delta /= batch;

    out.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        out[l].weights = delta * activations[l].transpose();
        out[l].bias = delta.rowwise().sum();
        if (l > 0) delta = (layers_[l].weights.transpose() * delta).cwiseProduct(masks[l - 1]);
    }
    return total / batch;
}

AdamOptimizer::AdamOptimizer(const Mlp& net, double learning_rate) : lr_(learning_rate) {
    for (const DenseLayer& l : net.layers()) {
        m_.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    }
    v_ = m_;
}

void AdamOptimizer::step(Mlp& net, const Mlp::Gradients& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
        v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
        param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEpsilon);
    };
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        update(net.layers()[l].weights, grads[l].weights, m_[l].weights, v_[l].weights);
        update(net.layers()[l].bias, grads[l].bias, m_[l].bias, v_[l].bias);
    }
}

ClassifierModel train_mlp(const Dataset& train, std::vector<Feature> features, const MlpParams& params) {
    params.validate();
    if (features.empty()) throw input_error("train_mlp: no input features");
    features = canonical_order(std::move(features));
    if (train.empty()) throw training_error("train_mlp: empty training set");
    if (train.count(Label::benign) == 0 || train.count(Label::malicious) == 0) {
        throw training_error("train_mlp: training data must contain both classes");
    }

    const Eigen::MatrixXd x = feature_matrix(train, features);
    if (!x.allFinite() || x.minCoeff() < -1e-9 || x.maxCoeff() > 1.0 + 1e-9) {
        throw input_error("train_mlp: input features must be normalized to [0, 1]");
    }
    std::vector<int> y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) y[i] = static_cast<int>(train.rows[i].label);

    std::mt19937_64 rng(params.seed);
    Mlp net(features.size(), params.hidden_layers, kClassCount, rng());
    AdamOptimizer adam(net, params.learning_rate);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    Mlp::Gradients grads;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
            const std::size_t end = std::min(order.size(), start + params.batch_size);
            Eigen::MatrixXd xb(x.rows(), static_cast<Eigen::Index>(end - start));
            std::vector<int> yb(end - start);
            for (std::size_t k = start; k < end; ++k) {
                xb.col(static_cast<Eigen::Index>(k - start)) = x.col(static_cast<Eigen::Index>(order[k]));
                yb[k - start] = y[order[k]];
            }
            const double loss = net.gradients(xb, yb, grads, params.dropout_rate, &rng);
            if (!std::isfinite(loss)) {
                throw training_error("train_mlp: loss became non-finite in epoch " + std::to_string(epoch + 1));
            }
            adam.step(net, grads);
        }
    }
    for (const DenseLayer& l : net.layers()) {
        if (!l.weights.allFinite() || !l.bias.allFinite()) throw training_error("train_mlp: weights diverged");
    }
    return ClassifierModel(std::move(features), std::move(net), params);
}

}  // namespace tfs
