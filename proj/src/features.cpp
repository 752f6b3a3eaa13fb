#include "tfs/features.hpp"

#include <algorithm>
#include <cctype>

#include "tfs/error.hpp"

namespace tfs {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kDisplayNames = {
    "Duration", "TotPkts", "InBytes", "OutBytes", "BytesPerSec", "PktsPerSec", "RatioOutIn"};

}  // namespace

std::string_view feature_name(Feature f) { return kDisplayNames[index_of(f)]; }

std::string canonical_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (unsigned char ch : name) {
        if (std::isalnum(ch)) out.push_back(static_cast<char>(std::tolower(ch)));
    }
    return out;
}

std::optional<Feature> parse_feature(std::string_view name) {
    const std::string key = canonical_name(name);
    for (Feature f : kAllFeatures) {
        if (canonical_name(feature_name(f)) == key) return f;
    }
    return std::nullopt;
}

std::vector<Feature> parse_feature_list(std::string_view csv) {
    std::vector<Feature> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t end = csv.find(',', start);
        if (end == std::string_view::npos) end = csv.size();
        std::string_view token = csv.substr(start, end - start);
        if (!canonical_name(token).empty()) {
            auto f = parse_feature(token);
            if (!f) throw input_error("unknown feature '" + std::string(token) + "'");
            out.push_back(*f);
        }
        start = end + 1;
    }
    if (out.empty()) throw input_error("empty feature list");
    return canonical_order(std::move(out));
}

std::vector<Feature> canonical_order(std::vector<Feature> features) {
    std::sort(features.begin(), features.end());
    auto dup = std::adjacent_find(features.begin(), features.end());
    if (dup != features.end()) {
        throw input_error("duplicate feature '" + std::string(feature_name(*dup)) + "'");
    }
    return features;
}

FeatureSet::FeatureSet(std::initializer_list<std::string_view> names) {
    for (auto n : names) insert(n);
}

FeatureSet::FeatureSet(const std::vector<Feature>& features) {
    for (Feature f : features) insert(feature_name(f));
}

bool FeatureSet::insert(std::string_view name) {
    std::string key = canonical_name(name);
    if (key.empty()) throw input_error("feature name has no alphanumeric characters");
    return names_.insert(std::move(key)).second;
}

bool FeatureSet::contains(std::string_view name) const {
    return names_.count(canonical_name(name)) != 0;
}

}  // namespace tfs
