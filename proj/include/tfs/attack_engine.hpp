#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tfs/features.hpp"
#include "tfs/flow_data.hpp"
#include "tfs/model_zoo.hpp"

namespace tfs {

enum class MagnitudeMode { mean_difference, mean_ratio };

std::string_view mode_name(MagnitudeMode m);
MagnitudeMode parse_mode(std::string_view s);

/// Per-class feature means over a (normalized) training split.
struct ClassMeans {
    std::array<double, kFeatureCount> benign{};
    std::array<double, kFeatureCount> malicious{};

    bool operator==(const ClassMeans&) const = default;
};

ClassMeans class_means(const Dataset& train);

struct AttackConfig {
    MagnitudeMode magnitude_mode = MagnitudeMode::mean_difference;
    double scaling_constant = 0.01;
    std::size_t max_iterations = 100;
    std::vector<Feature> perturbable_features{kBaseFeatures.begin(), kBaseFeatures.end()};
    double ratio_guard = 1e-6;
    /// Start every mask's candidate from the original flow instead of
    /// accumulating updates across masks.
    bool reset_per_mask = false;

    void validate() const;
    bool operator==(const AttackConfig&) const = default;
};

/// Non-empty subsets of k perturbable features as bitmasks (bit i selects
/// the i-th perturbable feature), ordered by popcount and then
/// lexicographically by selected positions.
std::vector<std::uint32_t> enumerate_masks(std::size_t k);

/// |benign - malicious| or benign / (malicious + ratio_guard).
double perturbation_magnitude(const ClassMeans& cm, MagnitudeMode mode, Feature f, double ratio_guard = 1e-6);

/// Syntactic box for the four base features plus the scaler that relates
/// record values to raw units (absent when records are raw).
struct ProjectionBounds {
    std::array<double, kBaseFeatureCount> lo{};
    std::array<double, kBaseFeatureCount> hi{};
    std::optional<ScalerParams> scaler;

    /// Raw-unit box: Duration and TotPkts >= 1e-6, byte counts >= 0, no upper limit.
    static ProjectionBounds raw_defaults();
    /// Observed per-feature range of `train`, tightened so that Duration and
    /// TotPkts stay strictly positive in raw units.
    static ProjectionBounds from_training(const Dataset& train);
};

/// Clamps base features into the box, then recomputes the derived features
/// from the clamped base values.
FlowRecord project(const FlowRecord& x, const ProjectionBounds& bounds);

/// Unmasked update for sweep t: sign(benign_mean - x0) * (c * t) * magnitude,
/// zero outside the perturbable features.
std::array<double, kFeatureCount> perturbation_step(const FlowRecord& x0, const ClassMeans& cm,
                                                    const AttackConfig& cfg, std::size_t t);

struct AttackResult {
    std::size_t row_index = 0;  ///< position of `original` in the attacked dataset
    FlowRecord original;
    FlowRecord adversarial;
    bool success = false;
    std::size_t iterations_used = 0;
    std::optional<std::size_t> mask_used;  ///< 1-based position in enumerate_masks order
    Label surrogate_label_after = Label::malicious;

    bool operator==(const AttackResult&) const = default;
};

/// Iterative masked perturbation of one malicious flow against the surrogate.
AttackResult craft_adversarial(const FlowRecord& x, const ClassifierModel& surrogate, const ClassMeans& cm,
                               const AttackConfig& cfg, const ProjectionBounds& bounds);

/// One result per malicious row, in row order. Benign rows are not attacked.
std::vector<AttackResult> craft_batch(const Dataset& ds, const ClassifierModel& surrogate, const ClassMeans& cm,
                                      const AttackConfig& cfg, const ProjectionBounds& bounds);

}  // namespace tfs
