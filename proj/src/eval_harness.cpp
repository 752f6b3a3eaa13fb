#include "tfs/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <iomanip>

#include "tfs/error.hpp"

namespace tfs {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw with_stage(stage, e);
    }
}

/// Stratified subset holding `fraction` of each class; fraction 1 keeps all.
Dataset subset(const Dataset& d, double fraction, std::uint64_t seed) {
    if (fraction >= 1.0) return d;
    return stratified_split(d, fraction, seed).first;
}

Dataset surrogate_training_set(const Dataset& target_train, const std::optional<Dataset>& pool, double overlap,
                               std::uint64_t seed) {
    if (overlap >= 1.0) return target_train;
    const std::size_t n = target_train.size();
    const auto shared = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(n)));
    const std::size_t external = n - shared;
    if (!pool || pool->size() < external) {
        throw input_error("surrogate pool holds " + std::to_string(pool ? pool->size() : 0) + " rows, " +
                          std::to_string(external) + " needed");
    }
    Dataset out;
    out.scaler = target_train.scaler;
    if (shared > 0) out = subset(target_train, overlap, derive_seed(seed, 0));
    const Dataset extra = subset(*pool, static_cast<double>(external) / static_cast<double>(pool->size()),
                                 derive_seed(seed, 1));
    out.rows.insert(out.rows.end(), extra.rows.begin(), extra.rows.end());
    return out;
}

}  // namespace

ClassificationReport ClassificationReport::from_confusion(const std::array<std::array<std::size_t, 2>, 2>& c) {
    ClassificationReport r;
    r.confusion = c;
    r.accuracy = ratio(c[0][0] + c[1][1], r.total());
    for (std::size_t k = 0; k < kClassCount; ++k) {
        const std::size_t tp = c[k][k];
        r.precision[k] = ratio(tp, c[0][k] + c[1][k]);
        r.recall[k] = ratio(tp, c[k][0] + c[k][1]);
        const double s = r.precision[k] + r.recall[k];
        r.f1[k] = s > 0.0 ? 2.0 * r.precision[k] * r.recall[k] / s : 0.0;
    }
    return r;
}

std::size_t ClassificationReport::total() const {
    return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
}

ClassificationReport classification_report(const ClassifierModel& m, const Dataset& d) {
    if (d.empty()) throw input_error("classification_report: empty dataset");
    std::array<std::array<std::size_t, 2>, 2> c{};
    for (const FlowRecord& r : d.rows) {
        ++c[static_cast<std::size_t>(r.label)][static_cast<std::size_t>(m.predict(r).label)];
    }
    return ClassificationReport::from_confusion(c);
}

TransferEvaluation transfer_evaluate(const ClassifierModel& target, const Dataset& clean,
                                     std::span<const AttackResult> results) {
    TransferEvaluation ev;
    ev.clean = classification_report(target, clean);
    Dataset attacked = clean;
    for (const AttackResult& r : results) {
        if (r.row_index >= clean.size() || !(clean.rows[r.row_index] == r.original)) {
            throw input_error("transfer_evaluate: attack result " + std::to_string(r.row_index) +
                              " does not match the evaluation dataset");
        }
        attacked.rows[r.row_index] = r.adversarial;
        ++ev.attacked;
        if (target.predict(r.adversarial).label == Label::benign) ++ev.evaded;
    }
    ev.adversarial = classification_report(target, attacked);
    ev.attack_success_rate = ratio(ev.evaded, ev.attacked);
    return ev;
}

ExperimentConfig ExperimentConfig::desk_default() {
    ExperimentConfig c;
    c.name = "desk-default";
    c.data.synth = SynthSpec::desk_default();
    c.target.seed = 1;
    c.surrogate.seed = 2;
    return c;
}

void ExperimentConfig::validate() const {
    if (data.csv.has_value() == data.synth.has_value()) throw input_error("config: exactly one data source (csv or synth) is required");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw input_error("config: train_fraction must lie in (0, 1)");
    if (!(surrogate_data.overlap >= 0.0 && surrogate_data.overlap <= 1.0)) {
        throw input_error("config: surrogate overlap must lie in [0, 1]");
    }
    if (surrogate_data.pool_csv && surrogate_data.pool_synth) {
        throw input_error("config: surrogate pool may name a csv or a synth spec, not both");
    }
    if (target_features.empty() || surrogate_features.empty()) throw input_error("config: model feature lists must be non-empty");
    canonical_order(target_features);
    canonical_order(surrogate_features);
    if (target.n_estimators < 1) throw input_error("config: target n_estimators must be >= 1");
    surrogate.validate();
    attack.validate();
    if (!std::isfinite(weights.sum())) throw input_error("config: weights must be finite");
}

TfsComponents compute_components(const ClassifierModel& surrogate, const ClassifierModel& target,
                                 const Dataset& surrogate_train, const Dataset& target_train,
                                 HomogeneityDetail* detail) {
    TfsComponents c;
    c.f_align = feature_alignment(surrogate.feature_set(), target.feature_set());
    c.a_sim = architecture_similarity(surrogate.descriptor(), target.descriptor());
    FeatureSet both = surrogate.feature_set();
    const FeatureSet target_set = target.feature_set();
    for (const std::string& n : target_set.names()) both.insert(n);
    HomogeneityDetail h = data_homogeneity_detail(surrogate_train, target_train, both);
    c.d_hom = h.d_hom;
    if (detail) *detail = std::move(h);
    return c;
}

ExperimentRun run_experiment_full(const ExperimentConfig& cfg) {
    in_stage("config", [&] {
        cfg.validate();
        return 0;
    });
    // A configured pool always joins the scaler fit, so a sweep over overlap
    // keeps one feature scale at every point.
    const bool needs_pool = cfg.surrogate_data.overlap < 1.0 || cfg.surrogate_data.pool_csv ||
                            cfg.surrogate_data.pool_synth;

    Dataset raw = in_stage("data", [&] {
        return cfg.data.csv ? load_csv(*cfg.data.csv, cfg.data.schema).dataset
                            : synthesize_flows(*cfg.data.synth, derive_seed(cfg.seed, 1));
    });
    std::optional<Dataset> pool_raw = in_stage("data", [&]() -> std::optional<Dataset> {
        if (!needs_pool) return std::nullopt;
        if (cfg.surrogate_data.pool_csv) return load_csv(*cfg.surrogate_data.pool_csv, cfg.data.schema).dataset;
        if (cfg.surrogate_data.pool_synth) return synthesize_flows(*cfg.surrogate_data.pool_synth, derive_seed(cfg.seed, 2));
        if (cfg.data.synth) return synthesize_flows(*cfg.data.synth, derive_seed(cfg.seed, 2));
        throw input_error("surrogate overlap below 1 needs a surrogate pool (pool_csv or pool_synth)");
    });

    // Both sources share one scaler so that their distances are comparable.
    auto [data, pool] = in_stage("preprocess", [&] {
        std::vector<Dataset> parts{clean_and_derive(raw, cfg.preprocess)};
        if (pool_raw) parts.push_back(clean_and_derive(*pool_raw, cfg.preprocess));
        const ScalerParams scaler = fit_scaler(parts);
        std::optional<Dataset> pool_scaled;
        if (pool_raw) pool_scaled = apply_scaler(parts[1], scaler);
        return std::pair{apply_scaler(parts[0], scaler), std::move(pool_scaled)};
    });

    ExperimentRun run;
    std::tie(run.target_train, run.test) =
        in_stage("split", [&] { return stratified_split(data, cfg.train_fraction, derive_seed(cfg.seed, 3)); });
    run.surrogate_train = in_stage("split", [&] {
        return surrogate_training_set(run.target_train, pool, cfg.surrogate_data.overlap, derive_seed(cfg.seed, 4));
    });

    run.target = in_stage("train-target",
                          [&] { return train_random_forest(run.target_train, cfg.target_features, cfg.target); });
    run.surrogate = in_stage("train-surrogate",
                             [&] { return train_mlp(run.surrogate_train, cfg.surrogate_features, cfg.surrogate); });

    run.results = in_stage("attack", [&] {
        const ClassMeans cm = class_means(run.surrogate_train);
        const ProjectionBounds bounds = ProjectionBounds::from_training(run.surrogate_train);
        return craft_batch(run.test, *run.surrogate, cm, cfg.attack, bounds);
    });

    const TransferEvaluation ev = in_stage("evaluate", [&] { return transfer_evaluate(*run.target, run.test, run.results); });

    ExperimentReport& rep = run.report;
    rep.name = cfg.name;
    rep.clean_report = ev.clean;
    rep.adversarial_report = ev.adversarial;
    rep.attacked = ev.attacked;
    rep.evaded = ev.evaded;
    rep.attack_success_rate = ev.attack_success_rate;
    const auto accepted = static_cast<std::size_t>(
        std::count_if(run.results.begin(), run.results.end(), [](const AttackResult& r) { return r.success; }));
    rep.surrogate_success_rate = ratio(accepted, run.results.size());
    in_stage("tfs", [&] {
        rep.tfs_components = compute_components(*run.surrogate, *run.target, run.surrogate_train, run.target_train,
                                                &rep.homogeneity);
        return 0;
    });
    rep.surrogate_descriptor = run.surrogate->descriptor();
    rep.target_descriptor = run.target->descriptor();
    rep.weights_used = cfg.weights;
    rep.tfs = compute_tfs(rep.tfs_components, cfg.weights);
    rep.target_train_rows = run.target_train.size();
    rep.surrogate_train_rows = run.surrogate_train.size();
    rep.test_rows = run.test.size();
    rep.config = cfg;
    return run;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) { return run_experiment_full(cfg).report; }

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw numeric_error("pearson_r: need two equal-length series of >= 2 points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw numeric_error("pearson_r: correlation undefined for a zero-variance series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<SuccessRateObservation> observations(const SweepResult& s) {
    std::vector<SuccessRateObservation> obs;
    for (const ExperimentReport& r : s.reports) obs.push_back({r.tfs_components, r.attack_success_rate});
    return obs;
}

SweepResult run_sweep(std::span<const ExperimentConfig> cfgs, bool fit, bool constrained) {
    if (cfgs.size() < 2) throw input_error("run_sweep: need at least two experiment configs");
    SweepResult s;
    for (const ExperimentConfig& c : cfgs) s.reports.push_back(run_experiment(c));

    std::vector<double> tfs, asr;
    for (const ExperimentReport& r : s.reports) {
        tfs.push_back(r.tfs);
        asr.push_back(r.attack_success_rate);
    }
    if (std::adjacent_find(tfs.begin(), tfs.end(), std::not_equal_to<>()) == tfs.end()) {
        throw numeric_error("run_sweep: degenerate sweep, every experiment has the same TFS (correlation undefined)");
    }
    std::vector<double> fitted;
    if (fit) {
        const auto obs = observations(s);
        s.fit = fit_weights(obs, constrained);
        for (const auto& o : obs) fitted.push_back(compute_tfs(o.components, s.fit->weights));
    }
    s.pearson_r = pearson_r(tfs, asr);
    if (fit) {
        try {
            s.fitted_pearson_r = pearson_r(fitted, asr);
        } catch (const Error&) {
            s.fitted_pearson_r.reset();
        }
    }
    return s;
}

std::string format_report(const ClassificationReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "              precision  recall     f1\n";
    for (Label l : {Label::benign, Label::malicious}) {
        const auto k = static_cast<std::size_t>(l);
        out << "  " << std::left << std::setw(10) << label_name(l) << std::right << std::setw(11) << r.precision[k]
            << std::setw(8) << r.recall[k] << std::setw(8) << r.f1[k] << '\n';
    }
    out << "  accuracy " << r.accuracy << "  (n=" << r.total() << ", confusion [[" << r.confusion[0][0] << ", "
        << r.confusion[0][1] << "], [" << r.confusion[1][0] << ", " << r.confusion[1][1] << "]])\n";
    return out.str();
}

std::string summary_table(const ExperimentReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "experiment " << r.name << '\n';
    out << "                     clean    adversarial   delta\n";
    auto row = [&](const char* label, double a, double b) {
        out << "  " << std::left << std::setw(18) << label << std::right << std::setw(7) << a << std::setw(14) << b
            << std::setw(9) << std::showpos << (b - a) << std::noshowpos << '\n';
    };
    const auto& c = r.clean_report;
    const auto& a = r.adversarial_report;
    row("accuracy", c.accuracy, a.accuracy);
    row("benign precision", c.precision[0], a.precision[0]);
    row("benign recall", c.recall[0], a.recall[0]);
    row("malicious precision", c.precision[1], a.precision[1]);
    row("malicious recall", c.recall[1], a.recall[1]);
    out << "  attacked " << r.attacked << ", evaded target " << r.evaded << ", success rate "
        << r.attack_success_rate << " (surrogate " << r.surrogate_success_rate << ")\n";
    out << "  f_align " << r.tfs_components.f_align << "  a_sim " << r.tfs_components.a_sim << "  d_hom "
        << r.tfs_components.d_hom << " (mean W " << r.homogeneity.mean_distance << ")\n";
    out << "  weights " << r.weights_used.alpha << ", " << r.weights_used.beta << ", " << r.weights_used.gamma
        << "  TFS " << r.tfs << '\n';
    return out.str();
}

std::string summary_table(const SweepResult& s) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "  name                  f_align   a_sim   d_hom     tfs     asr\n";
    for (const ExperimentReport& r : s.reports) {
        out << "  " << std::left << std::setw(20) << r.name << std::right << std::setw(8) << r.tfs_components.f_align
            << std::setw(8) << r.tfs_components.a_sim << std::setw(8) << r.tfs_components.d_hom << std::setw(8)
            << r.tfs << std::setw(8) << r.attack_success_rate << '\n';
    }
    out << "  pearson r (tfs vs asr) " << s.pearson_r << '\n';
    if (s.fit) {
        out << "  fitted weights " << s.fit->weights.alpha << ", " << s.fit->weights.beta << ", "
            << s.fit->weights.gamma << (s.fit->constrained ? " (sum to 1)" : " (unconstrained)") << ", sse "
            << std::scientific << s.fit->sse << std::fixed << '\n';
        if (s.fitted_pearson_r) out << "  pearson r under fitted weights " << *s.fitted_pearson_r << '\n';
    }
    return out.str();
}

}  // namespace tfs
