#include "tfs/flow_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tfs/error.hpp"

namespace tfs {

std::string_view label_name(Label l) { return l == Label::benign ? "benign" : "malicious"; }

DerivedValues derive(double duration, double tot_pkts, double in_bytes, double out_bytes) {
    const double secs = std::max(duration, kDivisionGuard);
    return {
        (in_bytes + out_bytes) / secs,
        tot_pkts / secs,
        out_bytes / (in_bytes + kDivisionGuard),
    };
}

void derive_features(FlowRecord& r) {
    const DerivedValues d = derive(r[Feature::duration], r[Feature::tot_pkts], r[Feature::in_bytes],
                                   r[Feature::out_bytes]);
    r[Feature::bytes_per_sec] = d.bytes_per_sec;
    r[Feature::pkts_per_sec] = d.pkts_per_sec;
    r[Feature::ratio_out_in] = d.ratio_out_in;
}

double ScalerParams::normalize(Feature f, double raw) const {
    const std::size_t i = index_of(f);
    const double span = max[i] - min[i];
    if (!(span > 0.0)) return 0.0;
    return (raw - min[i]) / span;
}

double ScalerParams::denormalize(Feature f, double scaled) const {
    const std::size_t i = index_of(f);
    const double span = max[i] - min[i];
    if (!(span > 0.0)) return min[i];
    return min[i] + scaled * span;
}

std::size_t Dataset::count(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [l](const FlowRecord& r) { return r.label == l; }));
}

Dataset clean_and_derive(const Dataset& raw, const PreprocessOptions& opts) {
    if (raw.empty()) throw input_error("preprocess: input dataset is empty");
    if (raw.normalized()) throw input_error("preprocess: input dataset is already normalized");

    Dataset out;
    out.rows.reserve(raw.size());
    for (const FlowRecord& r : raw.rows) {
        if (opts.tcp_only && r.protocol && *r.protocol != kProtocolTcp) continue;
        const bool complete = std::all_of(kBaseFeatures.begin(), kBaseFeatures.end(), [&](Feature f) {
            return std::isfinite(r[f]) && r[f] >= 0.0;
        });
        if (!complete) continue;
        FlowRecord row = r;
        derive_features(row);
        out.rows.push_back(row);
    }
    if (out.empty()) throw input_error("preprocess: every row was filtered out (empty result)");
    return out;
}

ScalerParams fit_scaler(std::span<const Dataset> parts) {
    ScalerParams s;
    s.min.fill(std::numeric_limits<double>::infinity());
    s.max.fill(-std::numeric_limits<double>::infinity());
    std::size_t seen = 0;
    for (const Dataset& d : parts) {
        if (d.normalized()) throw input_error("fit_scaler: dataset is already normalized");
        for (const FlowRecord& r : d.rows) {
            for (std::size_t i = 0; i < kFeatureCount; ++i) {
                s.min[i] = std::min(s.min[i], r.values[i]);
                s.max[i] = std::max(s.max[i], r.values[i]);
            }
            ++seen;
        }
    }
    if (seen == 0) throw input_error("fit_scaler: no rows");
    return s;
}

Dataset apply_scaler(const Dataset& raw, const ScalerParams& scaler) {
    if (raw.normalized()) throw input_error("apply_scaler: dataset is already normalized");
    Dataset out;
    out.scaler = scaler;
    out.rows = raw.rows;
    for (FlowRecord& r : out.rows) {
        for (Feature f : kAllFeatures) r[f] = scaler.normalize(f, r[f]);
    }
    return out;
}

Dataset remove_scaler(const Dataset& normalized) {
    if (!normalized.normalized()) return normalized;
    Dataset out;
    out.rows = normalized.rows;
    for (FlowRecord& r : out.rows) {
        for (Feature f : kAllFeatures) r[f] = normalized.scaler->denormalize(f, r[f]);
    }
    return out;
}

Dataset preprocess(const Dataset& raw, const PreprocessOptions& opts) {
    Dataset cleaned = clean_and_derive(raw, opts);
    if (!opts.normalize) return cleaned;
    const ScalerParams scaler = fit_scaler(std::span<const Dataset>(&cleaned, 1));
    return apply_scaler(cleaned, scaler);
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw input_error("stratified_split: train fraction must lie in (0, 1)");
    }
    std::array<std::vector<std::size_t>, kClassCount> by_class;
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        by_class[static_cast<std::size_t>(d.rows[i].label)].push_back(i);
    }
    for (const auto& idx : by_class) {
        if (idx.empty()) throw input_error("stratified_split: both classes must be present");
        if (train_fraction * static_cast<double>(idx.size()) < 1.0) {
            throw input_error("stratified_split: train fraction leaves a class without training rows");
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<char> in_train(d.rows.size(), 0);
    for (auto& idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size()))),
            1, idx.size());
        for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = 1;
    }

    Dataset train, test;
    train.scaler = test.scaler = d.scaler;
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        (in_train[i] ? train : test).rows.push_back(d.rows[i]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace tfs
