#pragma once

#include <span>
#include <string>
#include <vector>

#include "tfs/features.hpp"
#include "tfs/flow_data.hpp"

namespace tfs {

/// The three similarity dimensions between a surrogate and a target.
struct TfsComponents {
    double f_align = 0.0;  ///< feature alignment, [0, 1]
    double a_sim = 0.0;    ///< architecture similarity, <= 1 and may be negative
    double d_hom = 0.0;    ///< data homogeneity, (0, 1]

    /// Throws input_error when a component is non-finite or out of range.
    void validate() const;

    TfsComponents operator+(const TfsComponents& o) const {
        return {f_align + o.f_align, a_sim + o.a_sim, d_hom + o.d_hom};
    }
    bool operator==(const TfsComponents&) const = default;
};

struct TfsWeights {
    double alpha = 1.0 / 3.0;
    double beta = 1.0 / 3.0;
    double gamma = 1.0 / 3.0;

    static TfsWeights equal() { return {}; }
    double sum() const { return alpha + beta + gamma; }
    bool operator==(const TfsWeights&) const = default;
};

struct SuccessRateObservation {
    TfsComponents components;
    double success_rate = 0.0;
};

/// Jaccard index of the two feature sets. Throws when both are empty.
double feature_alignment(const FeatureSet& surrogate, const FeatureSet& target);

/// 1 - ||ps - pt|| / ||pt||, unclamped.
double architecture_similarity(std::span<const double> ps, std::span<const double> pt);

/// Exact order-1 Wasserstein distance between two empirical distributions,
/// evaluated as the integral of |F_a^-1(q) - F_b^-1(q)| over q in (0, 1).
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

struct HomogeneityDetail {
    std::vector<Feature> features;
    std::vector<double> distances;  ///< per-feature W1, same order as features
    double mean_distance = 0.0;
    double d_hom = 1.0;
};

/// Mean per-feature W1 over `features`, mapped through 1 / (1 + W). Both
/// datasets must be normalized with the same scaler.
HomogeneityDetail data_homogeneity_detail(const Dataset& ds, const Dataset& dt, const FeatureSet& features);
double data_homogeneity(const Dataset& ds, const Dataset& dt, const FeatureSet& features);

/// 1 / (1 + W) for an already aggregated distance W >= 0.
double homogeneity_from_distance(double w);

double compute_tfs(const TfsComponents& c, const TfsWeights& w);

struct WeightFit {
    TfsWeights weights;
    bool constrained = false;
    double sse = 0.0;
    double condition_number = 1.0;  ///< of the normal matrix actually solved
    /// Columns that were identically zero; they receive weight 0
    /// (unconstrained) or share the remaining mass equally (constrained).
    std::vector<std::string> dropped_columns;
};

inline constexpr double kMaxConditionNumber = 1e12;

/// Least-squares weights through the normal equations. In constrained mode
/// alpha + beta + gamma = 1 is imposed by eliminating gamma. Throws
/// numeric_error on fewer than three observations or an ill-conditioned
/// normal matrix, naming the collinear columns.
WeightFit fit_weights(std::span<const SuccessRateObservation> obs, bool constrained);

double sum_squared_error(std::span<const SuccessRateObservation> obs, const TfsWeights& w);

}  // namespace tfs
