#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tfs/features.hpp"

namespace tfs {

enum class Label : int { benign = 0, malicious = 1 };

inline constexpr std::size_t kClassCount = 2;

std::string_view label_name(Label l);

/// Substituted for a zero (or near-zero) flow duration when deriving rates,
/// and added to InBytes when deriving RatioOutIn.
inline constexpr double kDivisionGuard = 1e-6;

inline constexpr int kProtocolTcp = 6;

/// One aggregated network flow. Values are stored in `Feature` order.
struct FlowRecord {
    std::array<double, kFeatureCount> values{};
    Label label = Label::benign;
    std::optional<int> protocol;

    double& operator[](Feature f) { return values[index_of(f)]; }
    double operator[](Feature f) const { return values[index_of(f)]; }

    bool operator==(const FlowRecord&) const = default;
};

struct DerivedValues {
    double bytes_per_sec;
    double pkts_per_sec;
    double ratio_out_in;
};

/// Derived-feature formulas on raw (unnormalized) base values.
DerivedValues derive(double duration, double tot_pkts, double in_bytes, double out_bytes);

/// Overwrites the three derived features of a raw-scale record.
void derive_features(FlowRecord& r);

/// Per-feature min/max for min-max scaling. A feature whose min equals its
/// max maps to 0.
struct ScalerParams {
    std::array<double, kFeatureCount> min{};
    std::array<double, kFeatureCount> max{};

    double normalize(Feature f, double raw) const;
    double denormalize(Feature f, double scaled) const;

    bool operator==(const ScalerParams&) const = default;
};

struct Dataset {
    std::vector<FlowRecord> rows;
    /// Present iff `rows` are min-max normalized with these parameters.
    std::optional<ScalerParams> scaler;

    /// Every dataset carries all seven features; models select subsets.
    static constexpr const std::array<Feature, kFeatureCount>& feature_names() { return kAllFeatures; }

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    std::size_t count(Label l) const;
    bool normalized() const { return scaler.has_value(); }
};

// ---------------------------------------------------------------------------
// CSV ingestion

/// Maps logical fields to CSV header names. A field may list several columns,
/// which are summed (e.g. forward + backward packet counts).
struct ColumnSchema {
    std::map<std::string, std::vector<std::string>> columns;
    /// Multiplier applied to the duration column (1e-6 for microsecond input).
    double duration_scale = 1.0;
    /// Case-insensitive overrides; unmapped values fall back to
    /// "benign" => benign, anything else => malicious.
    std::map<std::string, Label> label_map;

    /// Header names "Duration", "TotPkts", ..., "Label", "Protocol".
    static ColumnSchema defaults();
};

struct CsvLoadResult {
    Dataset dataset;
    std::size_t skipped_rows = 0;
};

/// Reads one raw FlowRecord per parseable data row. Empty, NaN and infinite
/// numeric cells are kept as NaN so that preprocessing can drop the row as
/// incomplete; any other unparseable cell skips the row.
CsvLoadResult load_csv(const std::filesystem::path& path, const ColumnSchema& schema);

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessOptions {
    bool tcp_only = true;
    bool normalize = true;
};

/// TCP filter, incomplete-row removal and derived-feature recomputation.
/// The result is still on the raw scale.
Dataset clean_and_derive(const Dataset& raw, const PreprocessOptions& opts);

/// Fits min-max parameters over the union of the given raw datasets.
ScalerParams fit_scaler(std::span<const Dataset> parts);

Dataset apply_scaler(const Dataset& raw, const ScalerParams& scaler);

/// Maps a normalized dataset back to the raw scale.
Dataset remove_scaler(const Dataset& normalized);

/// clean_and_derive followed by min-max normalization fitted on the result.
Dataset preprocess(const Dataset& raw, const PreprocessOptions& opts);

/// Per-class shuffled split. Row order within each part follows the input.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic flows

/// Log-normal marginal given by its arithmetic mean and log-space sigma.
struct LogNormalParams {
    double mean = 1.0;
    double sigma = 0.5;
};

struct ClassProfile {
    std::size_t count = 0;
    /// Indexed by base feature: Duration, TotPkts, InBytes, OutBytes.
    std::array<LogNormalParams, kBaseFeatureCount> base{};
};

struct SynthSpec {
    ClassProfile benign;
    ClassProfile malicious;

    /// 1,900 benign + 100 malicious desk-scale flows.
    static SynthSpec desk_default();
};

Dataset synthesize_flows(const SynthSpec& spec, std::uint64_t seed);

}  // namespace tfs
