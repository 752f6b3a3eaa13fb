#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfs/attack_engine.hpp"
#include "tfs/flow_data.hpp"
#include "tfs/model_zoo.hpp"
#include "tfs/tfs_metric.hpp"

namespace tfs {

struct ClassificationReport {
    /// confusion[actual][predicted], index 0 = benign, 1 = malicious.
    std::array<std::array<std::size_t, kClassCount>, kClassCount> confusion{};
    double accuracy = 0.0;
    std::array<double, kClassCount> precision{};
    std::array<double, kClassCount> recall{};
    std::array<double, kClassCount> f1{};

    /// All metrics recomputed from the counts; f1 is 0 when precision and
    /// recall are both 0.
    static ClassificationReport from_confusion(const std::array<std::array<std::size_t, 2>, 2>& confusion);

    std::size_t total() const;
    bool operator==(const ClassificationReport&) const = default;
};

ClassificationReport classification_report(const ClassifierModel& m, const Dataset& d);

struct TransferEvaluation {
    ClassificationReport clean;
    ClassificationReport adversarial;
    std::size_t attacked = 0;
    std::size_t evaded = 0;  ///< adversarial rows the target labels benign
    double attack_success_rate = 0.0;
};

/// Scores the target on `clean`, then on `clean` with every attacked row
/// replaced by its adversarial version. Success is judged by the target.
TransferEvaluation transfer_evaluate(const ClassifierModel& target, const Dataset& clean,
                                     std::span<const AttackResult> results);

// ---------------------------------------------------------------------------
// Experiments

struct DataSourceConfig {
    std::optional<std::filesystem::path> csv;
    ColumnSchema schema = ColumnSchema::defaults();
    std::optional<SynthSpec> synth;
};

/// Where the surrogate's training rows come from. `overlap` is the share
/// drawn from the target's training split; the rest is drawn from an
/// attacker-side pool (a synthetic spec, a CSV, or by default the main
/// synthetic spec under a different seed).
struct SurrogateDataConfig {
    double overlap = 1.0;
    std::optional<SynthSpec> pool_synth;
    std::optional<std::filesystem::path> pool_csv;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DataSourceConfig data;
    PreprocessOptions preprocess;
    double train_fraction = 0.75;
    std::vector<Feature> target_features{Feature::duration,  Feature::tot_pkts,      Feature::in_bytes,
                                         Feature::out_bytes, Feature::bytes_per_sec, Feature::pkts_per_sec};
    RandomForestParams target;
    std::vector<Feature> surrogate_features{kBaseFeatures.begin(), kBaseFeatures.end()};
    MlpParams surrogate;
    SurrogateDataConfig surrogate_data;
    AttackConfig attack;
    TfsWeights weights;
    std::uint64_t seed = 42;

    /// The desk-scale default: synthetic flows, 200-tree target, 128x3 surrogate.
    static ExperimentConfig desk_default();
    void validate() const;
};

struct ExperimentReport {
    std::string name;
    ClassificationReport clean_report;
    ClassificationReport adversarial_report;
    std::size_t attacked = 0;
    std::size_t evaded = 0;
    double attack_success_rate = 0.0;
    double surrogate_success_rate = 0.0;  ///< attacks the surrogate itself accepted
    TfsComponents tfs_components;
    HomogeneityDetail homogeneity;
    ArchitectureDescriptor surrogate_descriptor{};
    ArchitectureDescriptor target_descriptor{};
    double tfs = 0.0;
    TfsWeights weights_used;
    std::size_t target_train_rows = 0;
    std::size_t surrogate_train_rows = 0;
    std::size_t test_rows = 0;
    ExperimentConfig config;
};

/// Every intermediate product of one experiment, for callers that persist them.
struct ExperimentRun {
    Dataset target_train;
    Dataset test;
    Dataset surrogate_train;
    std::optional<ClassifierModel> target;
    std::optional<ClassifierModel> surrogate;
    std::vector<AttackResult> results;
    ExperimentReport report;
};

/// Components for a trained pair: Jaccard over feature sets, descriptor
/// similarity, and homogeneity of the two training sets over the union of
/// the models' features.
TfsComponents compute_components(const ClassifierModel& surrogate, const ClassifierModel& target,
                                 const Dataset& surrogate_train, const Dataset& target_train,
                                 HomogeneityDetail* detail = nullptr);

/// Errors carry the name of the failing stage.
ExperimentRun run_experiment_full(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct SweepResult {
    std::vector<ExperimentReport> reports;
    double pearson_r = 0.0;  ///< TFS vs transfer attack success rate
    std::optional<WeightFit> fit;
    std::optional<double> fitted_pearson_r;  ///< same, with TFS under the fitted weights
};

/// Throws numeric_error when either series has zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Runs every config in order. Needs at least two experiments with distinct
/// TFS values; with `fit` the collected observations also go through
/// fit_weights.
SweepResult run_sweep(std::span<const ExperimentConfig> cfgs, bool fit, bool constrained);

std::vector<SuccessRateObservation> observations(const SweepResult& s);

// Plain-text terminal output.
std::string format_report(const ClassificationReport& r);
std::string summary_table(const ExperimentReport& r);
std::string summary_table(const SweepResult& s);

}  // namespace tfs
