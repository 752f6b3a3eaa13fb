#include "tfs/tfs_metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <Eigen/Dense>

#include "tfs/error.hpp"

namespace tfs {

namespace {

constexpr std::array<const char*, 3> kColumnNames = {"f_align", "a_sim", "d_hom"};

void require_finite(std::span<const double> v, const char* what) {
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
        throw input_error(std::string(what) + ": non-finite value");
    }
}

/// Solves the normal equations A^T A w = A^T b, rejecting ill-conditioned
/// systems. `names` label the columns of A for the error message.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const std::vector<std::string>& names, double& condition) {
    const Eigen::MatrixXd gram = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd lambda = eig.eigenvalues();  // ascending
    const double lo = lambda(0), hi = lambda(lambda.size() - 1);
    condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition <= kMaxConditionNumber)) {
        const Eigen::VectorXd v = eig.eigenvectors().col(0);
        const double vmax = v.cwiseAbs().maxCoeff();
        std::string cols;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) >= 0.1 * vmax) cols += (cols.empty() ? "" : ", ") + names[static_cast<std::size_t>(i)];
        }
        throw numeric_error("fit_weights: rank-deficient normal matrix (condition number " +
                            (std::isfinite(condition) ? std::to_string(condition) : std::string("inf")) +
                            "); collinear columns: " + cols);
    }
    return gram.ldlt().solve(a.transpose() * b);
}

}  // namespace

void TfsComponents::validate() const {
    if (!std::isfinite(f_align) || f_align < 0.0 || f_align > 1.0) throw input_error("f_align must lie in [0, 1]");
    if (!std::isfinite(a_sim) || a_sim > 1.0) throw input_error("a_sim must be finite and <= 1");
    if (!std::isfinite(d_hom) || d_hom <= 0.0 || d_hom > 1.0) throw input_error("d_hom must lie in (0, 1]");
}

double feature_alignment(const FeatureSet& surrogate, const FeatureSet& target) {
    if (surrogate.empty() && target.empty()) throw input_error("feature_alignment: both feature sets are empty");
    std::size_t common = 0;
    for (const std::string& n : surrogate.names()) common += target.names().count(n);
    const std::size_t uni = surrogate.size() + target.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

double architecture_similarity(std::span<const double> ps, std::span<const double> pt) {
    if (ps.size() != pt.size()) throw input_error("architecture_similarity: descriptor lengths differ");
    require_finite(ps, "architecture_similarity");
    require_finite(pt, "architecture_similarity");
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
        diff += (ps[i] - pt[i]) * (ps[i] - pt[i]);
        norm += pt[i] * pt[i];
    }
    if (!(norm > 0.0)) throw input_error("architecture_similarity: target descriptor has zero norm");
    return 1.0 - std::sqrt(diff) / std::sqrt(norm);
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw input_error("wasserstein_1d: empty sample");
    require_finite(a, "wasserstein_1d");
    require_finite(b, "wasserstein_1d");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    // Quantile levels are multiples of 1/(n*m): a's i-th order statistic covers
    // (i*m, (i+1)*m], b's j-th covers (j*n, (j+1)*n].
    const std::uint64_t n = sa.size(), m = sb.size();
    std::uint64_t i = 0, j = 0, q = 0;
    double total = 0.0;
    while (i < n && j < m) {
        const std::uint64_t end_a = (i + 1) * m, end_b = (j + 1) * n;
        const std::uint64_t next = std::min(end_a, end_b);
        total += static_cast<double>(next - q) * std::abs(sa[i] - sb[j]);
        q = next;
        if (end_a == next) ++i;
        if (end_b == next) ++j;
    }
    return total / (static_cast<double>(n) * static_cast<double>(m));
}

double homogeneity_from_distance(double w) {
    if (!std::isfinite(w) || w < 0.0) throw input_error("data_homogeneity: distance must be finite and >= 0");
    return 1.0 / (1.0 + w);
}

HomogeneityDetail data_homogeneity_detail(const Dataset& ds, const Dataset& dt, const FeatureSet& features) {
    if (features.empty()) throw input_error("data_homogeneity: empty feature set");
    if (ds.empty() || dt.empty()) throw input_error("data_homogeneity: empty dataset");
    if (!ds.normalized() || !dt.normalized()) throw input_error("data_homogeneity: datasets must be normalized");
    if (!(*ds.scaler == *dt.scaler)) throw input_error("data_homogeneity: datasets use different scalers");

    HomogeneityDetail out;
    for (const std::string& name : features.names()) {
        auto f = parse_feature(name);
        if (!f) throw input_error("data_homogeneity: unknown feature '" + name + "'");
        out.features.push_back(*f);
    }
    std::sort(out.features.begin(), out.features.end());

    std::vector<double> a(ds.size()), b(dt.size());
    for (Feature f : out.features) {
        for (std::size_t i = 0; i < ds.size(); ++i) a[i] = ds.rows[i][f];
        for (std::size_t i = 0; i < dt.size(); ++i) b[i] = dt.rows[i][f];
        out.distances.push_back(wasserstein_1d(a, b));
    }
    out.mean_distance = std::accumulate(out.distances.begin(), out.distances.end(), 0.0) /
                        static_cast<double>(out.distances.size());
    out.d_hom = homogeneity_from_distance(out.mean_distance);
    return out;
}

double data_homogeneity(const Dataset& ds, const Dataset& dt, const FeatureSet& features) {
    return data_homogeneity_detail(ds, dt, features).d_hom;
}

double compute_tfs(const TfsComponents& c, const TfsWeights& w) {
    return w.alpha * c.f_align + w.beta * c.a_sim + w.gamma * c.d_hom;
}

double sum_squared_error(std::span<const SuccessRateObservation> obs, const TfsWeights& w) {
    double sse = 0.0;
    for (const auto& o : obs) {
        const double r = o.success_rate - compute_tfs(o.components, w);
        sse += r * r;
    }
    return sse;
}

WeightFit fit_weights(std::span<const SuccessRateObservation> obs, bool constrained) {
    if (obs.size() < 3) {
        throw numeric_error("fit_weights: rank-deficient system, three weights need at least 3 observations (got " +
                            std::to_string(obs.size()) + ")");
    }
    const auto n = static_cast<Eigen::Index>(obs.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = obs[static_cast<std::size_t>(i)];
        x.row(i) << o.components.f_align, o.components.a_sim, o.components.d_hom;
        y(i) = o.success_rate;
    }
    if (!x.allFinite() || !y.allFinite()) throw input_error("fit_weights: non-finite observation");

    WeightFit fit;
    fit.constrained = constrained;
    std::vector<Eigen::Index> active;
    for (Eigen::Index c = 0; c < 3; ++c) {
        if (x.col(c).cwiseAbs().maxCoeff() == 0.0) {
            fit.dropped_columns.emplace_back(kColumnNames[static_cast<std::size_t>(c)]);
        } else {
            active.push_back(c);
        }
    }
    if (active.empty()) throw numeric_error("fit_weights: rank-deficient system, every component column is zero");

    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    std::vector<std::string> names;
    if (constrained && active.size() == 3) {
        // gamma = 1 - alpha - beta  =>  y - d = alpha (f - d) + beta (a - d)
        Eigen::MatrixXd reduced(n, 2);
        reduced.col(0) = x.col(0) - x.col(2);
        reduced.col(1) = x.col(1) - x.col(2);
        names = {"f_align - d_hom", "a_sim - d_hom"};
        const Eigen::VectorXd ab = solve_normal_equations(reduced, y - x.col(2), names, fit.condition_number);
        w << ab(0), ab(1), 1.0 - ab(0) - ab(1);
    } else {
        Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) {
            sub.col(static_cast<Eigen::Index>(k)) = x.col(active[k]);
            names.emplace_back(kColumnNames[static_cast<std::size_t>(active[k])]);
        }
        const Eigen::VectorXd sol = solve_normal_equations(sub, y, names, fit.condition_number);
        for (std::size_t k = 0; k < active.size(); ++k) w(active[k]) = sol(static_cast<Eigen::Index>(k));
        if (constrained) {
            // Dropped columns do not affect the fit; they absorb the remaining mass.
            const double rest = (1.0 - sol.sum()) / static_cast<double>(3 - active.size());
            for (Eigen::Index c = 0; c < 3; ++c) {
                if (std::find(active.begin(), active.end(), c) == active.end()) w(c) = rest;
            }
        }
    }
    fit.weights = {w(0), w(1), w(2)};
    fit.sse = sum_squared_error(obs, fit.weights);
    return fit;
}

}  // namespace tfs
