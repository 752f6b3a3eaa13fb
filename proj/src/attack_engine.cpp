#include "tfs/attack_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "tfs/error.hpp"

namespace tfs {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string_view mode_name(MagnitudeMode m) {
    return m == MagnitudeMode::mean_difference ? "mean_difference" : "mean_ratio";
}

MagnitudeMode parse_mode(std::string_view s) {
    const std::string key = canonical_name(s);
    if (key == "meandifference" || key == "difference" || key == "diff") return MagnitudeMode::mean_difference;
    if (key == "meanratio" || key == "ratio") return MagnitudeMode::mean_ratio;
    throw input_error("unknown magnitude mode '" + std::string(s) + "'");
}

ClassMeans class_means(const Dataset& train) {
    ClassMeans cm;
    std::array<std::size_t, kClassCount> counts{};
    for (const FlowRecord& r : train.rows) {
        auto& target = r.label == Label::benign ? cm.benign : cm.malicious;
        for (std::size_t i = 0; i < kFeatureCount; ++i) target[i] += r.values[i];
        ++counts[static_cast<std::size_t>(r.label)];
    }
    if (counts[0] == 0 || counts[1] == 0) throw input_error("class_means: both classes must be present");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        cm.benign[i] /= static_cast<double>(counts[0]);
        cm.malicious[i] /= static_cast<double>(counts[1]);
    }
    return cm;
}

void AttackConfig::validate() const {
    if (!(scaling_constant > 0.0) || !std::isfinite(scaling_constant)) throw input_error("attack: scaling constant must be > 0");
    if (max_iterations < 1) throw input_error("attack: max_iterations must be >= 1");
    if (!(ratio_guard > 0.0)) throw input_error("attack: ratio guard must be > 0");
    if (perturbable_features.empty()) throw input_error("attack: perturbable feature set is empty");
    if (perturbable_features.size() > 16) throw input_error("attack: too many perturbable features");
    for (Feature f : perturbable_features) {
        if (!is_base(f)) {
            throw input_error("attack: derived feature '" + std::string(feature_name(f)) +
                              "' cannot be perturbed directly");
        }
    }
    canonical_order(perturbable_features);
}

std::vector<std::uint32_t> enumerate_masks(std::size_t k) {
    if (k == 0 || k > 16) throw input_error("enumerate_masks: k must lie in [1, 16]");
    std::vector<std::uint32_t> masks;
    masks.reserve((1u << k) - 1);
    for (std::uint32_t m = 1; m < (1u << k); ++m) masks.push_back(m);
    // Lexicographic on the ascending list of selected positions.
    auto positions_less = [](std::uint32_t a, std::uint32_t b) {
        while (a && b) {
            const int pa = std::countr_zero(a), pb = std::countr_zero(b);
            if (pa != pb) return pa < pb;
            a &= a - 1;
            b &= b - 1;
        }
        return a == 0 && b != 0;
    };
    std::sort(masks.begin(), masks.end(), [&](std::uint32_t a, std::uint32_t b) {
        const int ca = std::popcount(a), cb = std::popcount(b);
        return ca != cb ? ca < cb : positions_less(a, b);
    });
    return masks;
}

double perturbation_magnitude(const ClassMeans& cm, MagnitudeMode mode, Feature f, double ratio_guard) {
    const double b = cm.benign[index_of(f)], m = cm.malicious[index_of(f)];
    if (mode == MagnitudeMode::mean_difference) return std::abs(b - m);
    return std::abs(b / (m + ratio_guard));
}

ProjectionBounds ProjectionBounds::raw_defaults() {
    ProjectionBounds b;
    const double inf = std::numeric_limits<double>::infinity();
    b.lo = {kDivisionGuard, kDivisionGuard, 0.0, 0.0};
    b.hi = {inf, inf, inf, inf};
    return b;
}

ProjectionBounds ProjectionBounds::from_training(const Dataset& train) {
    if (train.empty()) throw input_error("projection bounds: empty training set");
    ProjectionBounds b;
    b.scaler = train.scaler;
    b.lo.fill(std::numeric_limits<double>::infinity());
    b.hi.fill(-std::numeric_limits<double>::infinity());
    for (const FlowRecord& r : train.rows) {
        for (std::size_t i = 0; i < kBaseFeatureCount; ++i) {
            b.lo[i] = std::min(b.lo[i], r.values[i]);
            b.hi[i] = std::max(b.hi[i], r.values[i]);
        }
    }
    for (Feature f : {Feature::duration, Feature::tot_pkts}) {
        const std::size_t i = index_of(f);
        auto raw = [&](double v) { return b.scaler ? b.scaler->denormalize(f, v) : v; };
        if (raw(b.lo[i]) >= kDivisionGuard) continue;
        double lo = b.scaler ? b.scaler->normalize(f, kDivisionGuard) : kDivisionGuard;
        while (raw(lo) < kDivisionGuard) lo = std::nextafter(lo, std::numeric_limits<double>::infinity());
        b.lo[i] = lo;
        b.hi[i] = std::max(b.hi[i], lo);
    }
    return b;
}

FlowRecord project(const FlowRecord& x, const ProjectionBounds& bounds) {
    FlowRecord r = x;
    std::array<double, kBaseFeatureCount> raw{};
    for (Feature f : kBaseFeatures) {
        const std::size_t i = index_of(f);
        r[f] = std::clamp(r[f], bounds.lo[i], bounds.hi[i]);
        raw[i] = bounds.scaler ? bounds.scaler->denormalize(f, r[f]) : r[f];
    }
    const DerivedValues d = derive(raw[0], raw[1], raw[2], raw[3]);
    auto put = [&](Feature f, double v) { r[f] = bounds.scaler ? bounds.scaler->normalize(f, v) : v; };
    put(Feature::bytes_per_sec, d.bytes_per_sec);
    put(Feature::pkts_per_sec, d.pkts_per_sec);
    put(Feature::ratio_out_in, d.ratio_out_in);
    return r;
}

std::array<double, kFeatureCount> perturbation_step(const FlowRecord& x0, const ClassMeans& cm,
                                                    const AttackConfig& cfg, std::size_t t) {
    std::array<double, kFeatureCount> eps{};
    const double scale = cfg.scaling_constant * static_cast<double>(t);
    for (Feature f : cfg.perturbable_features) {
        const std::size_t i = index_of(f);
        eps[i] = sign(cm.benign[i] - x0[f]) * scale *
                 perturbation_magnitude(cm, cfg.magnitude_mode, f, cfg.ratio_guard);
    }
    return eps;
}

AttackResult craft_adversarial(const FlowRecord& x, const ClassifierModel& surrogate, const ClassMeans& cm,
                               const AttackConfig& cfg, const ProjectionBounds& bounds) {
    cfg.validate();
    if (x.label != Label::malicious) throw input_error("craft_adversarial: only malicious flows are attacked");
    const FeatureSet seen = surrogate.feature_set();
    for (Feature f : cfg.perturbable_features) {
        if (!seen.contains(feature_name(f))) {
            throw input_error("craft_adversarial: feature-space mismatch, surrogate does not consume '" +
                              std::string(feature_name(f)) + "'");
        }
    }

    const std::vector<Feature>& pf = cfg.perturbable_features;
    const std::vector<std::uint32_t> masks = enumerate_masks(pf.size());

    AttackResult res;
    res.original = x;
    FlowRecord current = x;
    for (std::size_t t = 1; t <= cfg.max_iterations; ++t) {
        const auto eps = perturbation_step(x, cm, cfg, t);
        for (std::size_t mi = 0; mi < masks.size(); ++mi) {
            FlowRecord candidate = cfg.reset_per_mask ? x : current;
            for (std::size_t k = 0; k < pf.size(); ++k) {
                if (masks[mi] & (1u << k)) candidate[pf[k]] += eps[index_of(pf[k])];
            }
            current = project(candidate, bounds);
            if (surrogate.predict(current).label == Label::benign) {
                res.adversarial = current;
                res.success = true;
                res.iterations_used = t;
                res.mask_used = mi + 1;
                res.surrogate_label_after = Label::benign;
                return res;
            }
        }
    }
    res.adversarial = current;
    res.iterations_used = cfg.max_iterations;
    res.surrogate_label_after = surrogate.predict(current).label;
    return res;
}

std::vector<AttackResult> craft_batch(const Dataset& ds, const ClassifierModel& surrogate, const ClassMeans& cm,
                                      const AttackConfig& cfg, const ProjectionBounds& bounds) {
    std::vector<AttackResult> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.rows[i].label != Label::malicious) continue;
        AttackResult r = craft_adversarial(ds.rows[i], surrogate, cm, cfg, bounds);
        r.row_index = i;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace tfs
