#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tfs {

/// The seven flow features the toolkit models. The first four are measured
/// directly; the last three are derived from them.
enum class Feature : std::size_t {
    duration = 0,
    tot_pkts,
    in_bytes,
    out_bytes,
    bytes_per_sec,
    pkts_per_sec,
    ratio_out_in,
};

inline constexpr std::size_t kFeatureCount = 7;
inline constexpr std::size_t kBaseFeatureCount = 4;

inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::duration,      Feature::tot_pkts,     Feature::in_bytes,     Feature::out_bytes,
    Feature::bytes_per_sec, Feature::pkts_per_sec, Feature::ratio_out_in,
};

inline constexpr std::array<Feature, kBaseFeatureCount> kBaseFeatures = {
    Feature::duration, Feature::tot_pkts, Feature::in_bytes, Feature::out_bytes};

constexpr std::size_t index_of(Feature f) { return static_cast<std::size_t>(f); }
constexpr bool is_base(Feature f) { return index_of(f) < kBaseFeatureCount; }

/// Display name, e.g. "TotPkts".
std::string_view feature_name(Feature f);

/// Lower-cases and strips everything except letters and digits, so that
/// "Tot Pkts", "tot_pkts" and "TotPkts" compare equal.
std::string canonical_name(std::string_view name);

std::optional<Feature> parse_feature(std::string_view name);

/// Parses a comma separated list of feature names; throws input_error on an
/// unknown name or a duplicate.
std::vector<Feature> parse_feature_list(std::string_view csv);

/// Sorts into canonical order and rejects duplicates.
std::vector<Feature> canonical_order(std::vector<Feature> features);

/// Unordered set of canonical feature names.
class FeatureSet {
public:
    FeatureSet() = default;
    FeatureSet(std::initializer_list<std::string_view> names);
    explicit FeatureSet(const std::vector<Feature>& features);

    /// Returns false if the canonical name was already present.
    bool insert(std::string_view name);
    bool contains(std::string_view name) const;

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    const std::set<std::string>& names() const { return names_; }

    bool operator==(const FeatureSet&) const = default;

private:
    std::set<std::string> names_;
};

}  // namespace tfs
