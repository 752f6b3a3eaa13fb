#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tfs/attack_engine.hpp"
#include "tfs/eval_harness.hpp"
#include "tfs/flow_data.hpp"
#include "tfs/model_zoo.hpp"
#include "tfs/tfs_metric.hpp"

namespace tfs {

using json = nlohmann::json;

/// Every artifact carries this version and a "kind" tag.
inline constexpr int kSchemaVersion = 1;

json artifact(std::string_view kind);
/// Throws input_error unless `j` is an artifact of the given kind and version.
void check_artifact(const json& j, std::string_view kind);

void to_json(json& j, Label l);
void from_json(const json& j, Label& l);
void to_json(json& j, const FlowRecord& r);
void from_json(const json& j, FlowRecord& r);
void to_json(json& j, const ScalerParams& s);
void from_json(const json& j, ScalerParams& s);
void to_json(json& j, const Dataset& d);
void from_json(const json& j, Dataset& d);
void to_json(json& j, const ColumnSchema& s);
void from_json(const json& j, ColumnSchema& s);
void to_json(json& j, const SynthSpec& s);
void from_json(const json& j, SynthSpec& s);
void to_json(json& j, const PreprocessOptions& o);
void from_json(const json& j, PreprocessOptions& o);
void to_json(json& j, const RandomForestParams& p);
void from_json(const json& j, RandomForestParams& p);
void to_json(json& j, const MlpParams& p);
void from_json(const json& j, MlpParams& p);
void to_json(json& j, const AttackConfig& c);
void from_json(const json& j, AttackConfig& c);
void to_json(json& j, const AttackResult& r);
void from_json(const json& j, AttackResult& r);
void to_json(json& j, const TfsComponents& c);
void from_json(const json& j, TfsComponents& c);
void to_json(json& j, const TfsWeights& w);
void from_json(const json& j, TfsWeights& w);
void to_json(json& j, const WeightFit& f);
void from_json(const json& j, WeightFit& f);
void to_json(json& j, const HomogeneityDetail& h);
void from_json(const json& j, HomogeneityDetail& h);
void to_json(json& j, const ClassificationReport& r);
void from_json(const json& j, ClassificationReport& r);
void to_json(json& j, const ExperimentConfig& c);
void from_json(const json& j, ExperimentConfig& c);
void to_json(json& j, const ExperimentReport& r);
void from_json(const json& j, ExperimentReport& r);
void to_json(json& j, const SweepResult& s);
void from_json(const json& j, SweepResult& s);

json features_to_json(const std::vector<Feature>& fs);
std::vector<Feature> features_from_json(const json& j);

/// Versioned model artifact: family, features, hyperparameters, trained
/// state and descriptor. Loading re-derives the descriptor and rejects a
/// mismatch.
json model_to_json(const ClassifierModel& m);
ClassifierModel model_from_json(const json& j);

/// Parses "0.3,0.3,0.4".
TfsWeights parse_weights(std::string_view csv);

/// Relative paths inside the config are resolved against `base_dir`.
ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir);

// File helpers. Reads throw input_error on a missing or malformed file.
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

void write_attack_results(const std::filesystem::path& path, const std::vector<AttackResult>& results);
std::vector<AttackResult> read_attack_results(const std::filesystem::path& path);

/// One "f_align,a_sim,d_hom,tfs,asr" row per experiment, with a header.
std::string sweep_csv(const SweepResult& s);

}  // namespace tfs
