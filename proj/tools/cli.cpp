#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tfs/error.hpp"
#include "tfs/eval_harness.hpp"
#include "tfs/serialization.hpp"

namespace tfs::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitTraining = 3;
constexpr int kExitPipeline = 4;

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::input: return kExitUsage;
        case ErrorKind::training: return kExitTraining;
        default: return kExitPipeline;
    }
}

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    bool quiet = false;

    std::uint64_t seed_or(std::uint64_t fallback) const { return seed.value_or(fallback); }
    fs::path path(const std::string& name) const { return fs::path(out) / name; }
};

struct PreprocessArgs {
    std::string csv;
    std::string synth;
    std::string schema;
    std::string scaler;
    bool keep_all_protocols = false;
};

struct TrainArgs {
    std::string data;
    std::string model = "rf";
    std::string features;
    std::string output;
    std::size_t estimators = 200;
    std::optional<std::size_t> max_depth;
    std::string hidden = "128,128,128";
    std::size_t epochs = 30;
    std::size_t batch = 64;
    double dropout = 0.2;
    double learning_rate = 1e-3;
    double train_fraction = 0.75;
};

struct AttackArgs {
    std::string data;
    std::string surrogate;
    std::string output;
    std::string mode = "mean_difference";
    double scale = 0.01;
    std::size_t max_iterations = 100;
    std::string features = "Duration,TotPkts,InBytes,OutBytes";
    bool reset_per_mask = false;
    double train_fraction = 0.75;
};

struct TfsArgs {
    std::string data;
    std::string surrogate_data;
    std::string target;
    std::string surrogate;
    std::string results;
    std::string output;
    std::string weights = "0.333333333333333333,0.333333333333333333,0.333333333333333333";
    double train_fraction = 0.75;
};

struct FitArgs {
    std::string observations;
    bool unconstrained = false;
};

struct SweepArgs {
    std::vector<std::string> configs;
    bool fit = false;
    bool unconstrained = false;
};

std::string default_if_empty(const std::string& v, const fs::path& fallback) {
    return v.empty() ? fallback.string() : v;
}

Dataset load_dataset(const fs::path& p) {
    if (!fs::exists(p)) throw input_error("dataset artifact '" + p.string() + "' not found");
    return read_json(p).get<Dataset>();
}

ClassifierModel load_model(const fs::path& p) {
    if (!fs::exists(p)) throw input_error("model artifact '" + p.string() + "' not found");
    return model_from_json(read_json(p));
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(tok, &used);
            if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw input_error("'" + tok + "' is not a positive layer width");
        }
    }
    return out;
}

std::string counts_line(const Dataset& d) {
    std::ostringstream s;
    s << "rows " << d.size() << " (benign " << d.count(Label::benign) << ", malicious " << d.count(Label::malicious)
      << ")";
    return s.str();
}

ExperimentConfig load_experiment(const Globals& g) {
    ExperimentConfig cfg = ExperimentConfig::desk_default();
    if (!g.config.empty()) {
        const fs::path p(g.config);
        cfg = experiment_config_from_json(read_json(p), p.parent_path());
    }
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    return cfg;
}

/// A sweep file is either a list of experiment configs or
/// {"base": {...}, "experiments": [{...}, ...]} where every entry is merged
/// over the base.
std::vector<ExperimentConfig> load_sweep(const fs::path& p, const Globals& g) {
    const json j = read_json(p);
    std::vector<json> entries;
    if (j.is_array()) {
        entries.assign(j.begin(), j.end());
    } else if (j.is_object() && j.contains("experiments")) {
        const json base = j.value("base", json::object());
        for (const json& e : j.at("experiments")) {
            json merged = base;
            merged.merge_patch(e);
            entries.push_back(std::move(merged));
        }
    } else {
        entries.push_back(j);
    }
    std::vector<ExperimentConfig> cfgs;
    for (const json& e : entries) {
        ExperimentConfig c = experiment_config_from_json(e, p.parent_path());
        if (g.seed) c.seed = *g.seed;
        cfgs.push_back(std::move(c));
    }
    return cfgs;
}

std::vector<SuccessRateObservation> load_observations(const fs::path& p) {
    const json j = read_json(p);
    if (j.is_object() && j.value("kind", "") == "sweep_result") return observations(j.get<SweepResult>());
    if (!j.is_array()) throw input_error("observations must be a sweep_result artifact or a JSON array");
    std::vector<SuccessRateObservation> obs;
    for (const json& e : j) {
        SuccessRateObservation o;
        o.components = e.get<TfsComponents>();
        o.success_rate = e.at("asr").get<double>();
        obs.push_back(o);
    }
    return obs;
}

void write_run(const Globals& g, const ExperimentRun& run) {
    write_json(g.path("target_train.json"), run.target_train);
    write_json(g.path("test.json"), run.test);
    write_json(g.path("surrogate_train.json"), run.surrogate_train);
    write_json(g.path("target.json"), model_to_json(*run.target));
    write_json(g.path("surrogate.json"), model_to_json(*run.surrogate));
    write_attack_results(g.path("attack_results.jsonl"), run.results);
    write_json(g.path("report.json"), run.report);
}

// ---------------------------------------------------------------------------

int cmd_preprocess(const Globals& g, const PreprocessArgs& a, std::ostream& out) {
    if (!a.csv.empty() && !a.synth.empty()) throw input_error("--csv and --synth are mutually exclusive");
    Dataset raw;
    PreprocessOptions opts;
    if (!a.csv.empty() || !a.synth.empty()) {
        opts.tcp_only = !a.keep_all_protocols;
        if (!a.csv.empty()) {
            ColumnSchema schema = ColumnSchema::defaults();
            if (!a.schema.empty()) read_json(a.schema).get_to(schema);
            const CsvLoadResult r = load_csv(a.csv, schema);
            if (!g.quiet && r.skipped_rows > 0) out << "skipped " << r.skipped_rows << " unparseable rows\n";
            raw = r.dataset;
        } else {
            SynthSpec spec = SynthSpec::desk_default();
            if (a.synth != "default") read_json(a.synth).get_to(spec);
            raw = synthesize_flows(spec, g.seed_or(42));
        }
    } else {
        const ExperimentConfig cfg = load_experiment(g);
        opts = cfg.preprocess;
        if (a.keep_all_protocols) opts.tcp_only = false;
        raw = cfg.data.csv ? load_csv(*cfg.data.csv, cfg.data.schema).dataset
                           : synthesize_flows(*cfg.data.synth, cfg.seed);
    }

    Dataset clean = clean_and_derive(raw, opts);
    if (opts.normalize) {
        ScalerParams scaler = a.scaler.empty() ? fit_scaler(std::span<const Dataset>(&clean, 1))
                                               : read_json(a.scaler).at("scaler").get<ScalerParams>();
        clean = apply_scaler(clean, scaler);
        json sj = artifact("scaler");
        sj["scaler"] = scaler;
        write_json(g.path("scaler.json"), sj);
    }
    write_json(g.path("dataset.json"), clean);
    if (!g.quiet) out << counts_line(clean) << "\nwrote " << g.path("dataset.json").string() << '\n';
    return 0;
}

int cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out) {
    const Dataset d = load_dataset(default_if_empty(a.data, g.path("dataset.json")));
    const auto [train, test] = stratified_split(d, a.train_fraction, g.seed_or(42));
    const std::uint64_t model_seed = g.seed_or(0);

    std::optional<ClassifierModel> model;
    std::string role;
    if (a.model == "rf") {
        role = "target";
        RandomForestParams p;
        p.n_estimators = a.estimators;
        p.max_depth = a.max_depth;
        p.seed = model_seed;
        const auto feats = a.features.empty() ? ExperimentConfig{}.target_features : parse_feature_list(a.features);
        model = train_random_forest(train, feats, p);
    } else if (a.model == "mlp") {
        role = "surrogate";
        MlpParams p;
        p.hidden_layers = parse_sizes(a.hidden);
        p.epochs = a.epochs;
        p.batch_size = a.batch;
        p.dropout_rate = a.dropout;
        p.learning_rate = a.learning_rate;
        p.seed = model_seed;
        const auto feats =
            a.features.empty() ? ExperimentConfig{}.surrogate_features : parse_feature_list(a.features);
        model = train_mlp(train, feats, p);
    } else {
        throw input_error("--model must be 'rf' or 'mlp'");
    }

    const fs::path dest = default_if_empty(a.output, g.path(role + ".json"));
    write_json(dest, model_to_json(*model));
    if (!g.quiet) {
        const auto desc = model->descriptor();
        out << family_name(model->family()) << " on " << counts_line(train) << "\n";
        out << "descriptor [" << desc[0] << ", " << desc[1] << ", " << desc[2] << ", " << desc[3] << ", " << desc[4]
            << "]\n";
        out << "held-out test, " << counts_line(test) << "\n" << format_report(classification_report(*model, test));
        out << "wrote " << dest.string() << '\n';
    }
    return 0;
}

int cmd_attack(const Globals& g, const AttackArgs& a, std::ostream& out) {
    const Dataset d = load_dataset(default_if_empty(a.data, g.path("dataset.json")));
    const ClassifierModel surrogate = load_model(default_if_empty(a.surrogate, g.path("surrogate.json")));
    const auto [train, test] = stratified_split(d, a.train_fraction, g.seed_or(42));

    AttackConfig cfg;
    cfg.magnitude_mode = parse_mode(a.mode);
    cfg.scaling_constant = a.scale;
    cfg.max_iterations = a.max_iterations;
    cfg.perturbable_features = parse_feature_list(a.features);
    cfg.reset_per_mask = a.reset_per_mask;

    const auto results = craft_batch(test, surrogate, class_means(train), cfg, ProjectionBounds::from_training(train));
    const fs::path dest = default_if_empty(a.output, g.path("attack_results.jsonl"));
    write_attack_results(dest, results);
    if (!g.quiet) {
        std::size_t ok = 0;
        for (const auto& r : results) ok += r.success ? 1 : 0;
        out << "attacked " << results.size() << " malicious test flows, surrogate fooled on " << ok << "\nwrote "
            << dest.string() << '\n';
    }
    return 0;
}

int cmd_tfs(const Globals& g, const TfsArgs& a, std::ostream& out) {
    const std::uint64_t split_seed = g.seed_or(42);
    const Dataset d = load_dataset(default_if_empty(a.data, g.path("dataset.json")));
    const auto [target_train, test] = stratified_split(d, a.train_fraction, split_seed);
    Dataset surrogate_train = target_train;
    if (!a.surrogate_data.empty()) surrogate_train = stratified_split(load_dataset(a.surrogate_data), a.train_fraction, split_seed).first;

    const ClassifierModel target = load_model(default_if_empty(a.target, g.path("target.json")));
    const ClassifierModel surrogate = load_model(default_if_empty(a.surrogate, g.path("surrogate.json")));
    const auto results = read_attack_results(default_if_empty(a.results, g.path("attack_results.jsonl")));
    const TfsWeights weights = parse_weights(a.weights);

    ExperimentReport r;
    r.name = "tfs";
    const TransferEvaluation ev = transfer_evaluate(target, test, results);
    r.clean_report = ev.clean;
    r.adversarial_report = ev.adversarial;
    r.attacked = ev.attacked;
    r.evaded = ev.evaded;
    r.attack_success_rate = ev.attack_success_rate;
    std::size_t fooled = 0;
    for (const auto& res : results) fooled += res.success ? 1 : 0;
    r.surrogate_success_rate = results.empty() ? 0.0 : static_cast<double>(fooled) / static_cast<double>(results.size());
    r.tfs_components = compute_components(surrogate, target, surrogate_train, target_train, &r.homogeneity);
    r.surrogate_descriptor = surrogate.descriptor();
    r.target_descriptor = target.descriptor();
    r.weights_used = weights;
    r.tfs = compute_tfs(r.tfs_components, weights);
    r.target_train_rows = target_train.size();
    r.surrogate_train_rows = surrogate_train.size();
    r.test_rows = test.size();

    r.config.name = r.name;
    r.config.train_fraction = a.train_fraction;
    r.config.seed = split_seed;
    r.config.weights = weights;
    r.config.target_features = target.features();
    r.config.surrogate_features = surrogate.features();
    if (const auto* rf = target.forest()) r.config.target = rf->params();
    if (const auto* mp = surrogate.mlp_params()) r.config.surrogate = *mp;

    const fs::path dest = default_if_empty(a.output, g.path("report.json"));
    write_json(dest, r);
    if (!g.quiet) {
        out << summary_table(r);
        out << "weights sum " << std::setprecision(12) << weights.sum()
            << (std::abs(weights.sum() - 1.0) <= 1e-9 ? " (constrained)" : " (not summing to 1)") << '\n';
        out << "wrote " << dest.string() << '\n';
    }
    return 0;
}

int cmd_fit_weights(const Globals& g, const FitArgs& a, std::ostream& out) {
    const auto obs = load_observations(default_if_empty(a.observations, g.path("sweep.json")));
    const WeightFit fit = fit_weights(obs, !a.unconstrained);
    json j = artifact("weight_fit");
    j["fit"] = fit;
    write_json(g.path("weights.json"), j);
    if (!g.quiet) {
        out << std::setprecision(6) << "alpha " << fit.weights.alpha << "  beta " << fit.weights.beta << "  gamma "
            << fit.weights.gamma << "  (sum " << fit.weights.sum() << ", sse " << fit.sse << ", cond "
            << fit.condition_number << ")\n";
        out << "wrote " << g.path("weights.json").string() << '\n';
    }
    return 0;
}

int cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
    std::vector<ExperimentConfig> cfgs;
    std::vector<std::string> files = a.configs;
    if (files.empty() && !g.config.empty()) files.push_back(g.config);
    if (files.empty()) throw input_error("sweep: pass experiment config files or --config with a sweep file");
    for (const auto& f : files) {
        auto part = load_sweep(f, g);
        cfgs.insert(cfgs.end(), part.begin(), part.end());
    }
    const SweepResult s = run_sweep(cfgs, a.fit, !a.unconstrained);
    write_json(g.path("sweep.json"), s);
    write_text(g.path("sweep.csv"), sweep_csv(s));
    if (!g.quiet) out << summary_table(s) << "wrote " << g.path("sweep.json").string() << '\n';
    return 0;
}

int cmd_run_all(const Globals& g, std::ostream& out) {
    const ExperimentConfig cfg = load_experiment(g);
    const ExperimentRun run = run_experiment_full(cfg);
    write_run(g, run);
    if (!g.quiet) out << summary_table(run.report) << "wrote artifacts to " << g.out << '\n';
    return 0;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Surrogate-based adversarial flow crafting and transferability scoring for flow-based NIDS"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tfsctl 1.0.0");

    Globals g;
    app.add_option("--config", g.config, "Experiment or sweep config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for splits, synthesis and training");
    app.add_option("--out", g.out, "Output directory for artifacts")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress summaries on stdout");

    PreprocessArgs pa;
    auto* pre = app.add_subcommand("preprocess", "Load or synthesize flows, clean, derive and normalize");
    auto* csv_opt = pre->add_option("--csv", pa.csv, "Input CSV with a header row")->check(CLI::ExistingFile);
    pre->add_option("--synth", pa.synth, "Synthetic spec JSON, or 'default'")->excludes(csv_opt);
    pre->add_option("--schema", pa.schema, "Column mapping JSON for --csv")->check(CLI::ExistingFile);
    pre->add_option("--scaler", pa.scaler, "Reuse a scaler artifact instead of fitting one")->check(CLI::ExistingFile);
    pre->add_flag("--all-protocols", pa.keep_all_protocols, "Keep non-TCP flows");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a model on the training split of a dataset artifact");
    train->add_option("--data", ta.data, "Dataset artifact (default <out>/dataset.json)");
    train->add_option("--model", ta.model, "Model family")->check(CLI::IsMember({"rf", "mlp"}))->capture_default_str();
    train->add_option("--features", ta.features, "Comma-separated input features");
    train->add_option("--output", ta.output, "Model artifact path (default <out>/target.json or surrogate.json)");
    train->add_option("--estimators", ta.estimators, "Random forest trees")->capture_default_str();
    train->add_option("--max-depth", ta.max_depth, "Random forest depth limit");
    train->add_option("--hidden", ta.hidden, "MLP hidden layer widths")->capture_default_str();
    train->add_option("--epochs", ta.epochs, "MLP epochs")->capture_default_str();
    train->add_option("--batch-size", ta.batch, "MLP batch size")->capture_default_str();
    train->add_option("--dropout", ta.dropout, "MLP dropout rate")->capture_default_str();
    train->add_option("--learning-rate", ta.learning_rate, "MLP Adam learning rate")->capture_default_str();
    train->add_option("--train-fraction", ta.train_fraction, "Stratified training share")->capture_default_str();

    AttackArgs aa;
    auto* attack = app.add_subcommand("attack", "Craft adversarial versions of the malicious test flows");
    attack->add_option("--data", aa.data, "Dataset artifact (default <out>/dataset.json)");
    attack->add_option("--surrogate", aa.surrogate, "Surrogate model artifact (default <out>/surrogate.json)");
    attack->add_option("--output", aa.output, "Results path (default <out>/attack_results.jsonl)");
    attack->add_option("--mode", aa.mode, "mean_difference or mean_ratio")->capture_default_str();
    attack->add_option("--scale", aa.scale, "Scaling constant c")->capture_default_str();
    attack->add_option("--max-iterations", aa.max_iterations, "Full mask sweeps per flow")->capture_default_str();
    attack->add_option("--features", aa.features, "Perturbable base features")->capture_default_str();
    attack->add_flag("--reset-per-mask", aa.reset_per_mask, "Restart each mask from the original flow");
    attack->add_option("--train-fraction", aa.train_fraction, "Stratified training share")->capture_default_str();

    TfsArgs fa;
    auto* tfs_cmd = app.add_subcommand("tfs", "Evaluate transfer to the target and score the pair");
    tfs_cmd->add_option("--data", fa.data, "Target dataset artifact (default <out>/dataset.json)");
    tfs_cmd->add_option("--surrogate-data", fa.surrogate_data, "Surrogate dataset artifact (default: same as --data)");
    tfs_cmd->add_option("--target", fa.target, "Target model artifact (default <out>/target.json)");
    tfs_cmd->add_option("--surrogate", fa.surrogate, "Surrogate model artifact (default <out>/surrogate.json)");
    tfs_cmd->add_option("--results", fa.results, "Attack results (default <out>/attack_results.jsonl)");
    tfs_cmd->add_option("--output", fa.output, "Report path (default <out>/report.json)");
    tfs_cmd->add_option("--weights", fa.weights, "alpha,beta,gamma (default equal thirds)");
    tfs_cmd->add_option("--train-fraction", fa.train_fraction, "Stratified training share")->capture_default_str();

    FitArgs wa;
    auto* fit = app.add_subcommand("fit-weights", "Least-squares weights from observed success rates");
    fit->add_option("--observations", wa.observations,
                    "sweep.json or a JSON array of {f_align, a_sim, d_hom, asr} (default <out>/sweep.json)");
    fit->add_flag("--unconstrained", wa.unconstrained, "Do not force alpha + beta + gamma = 1");

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "Run several experiments and correlate TFS with success rate");
    sweep->add_option("configs", sa.configs, "Experiment or sweep config files")->check(CLI::ExistingFile);
    sweep->add_flag("--fit-weights", sa.fit, "Fit weights on the sweep observations");
    sweep->add_flag("--unconstrained", sa.unconstrained, "Unconstrained weight fit");

    auto* all = app.add_subcommand("run-all", "Run every stage from one experiment config");

    const auto usage = [&](const std::string& msg) {
        err << "error: " << msg << '\n';
        return kExitUsage;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << app.version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        return usage(e.what());
    }

    std::string stage;
    try {
        for (const CLI::App* sub : app.get_subcommands()) stage = sub->get_name();
        if (pre->parsed()) return cmd_preprocess(g, pa, out);
        if (train->parsed()) return cmd_train(g, ta, out);
        if (attack->parsed()) return cmd_attack(g, aa, out);
        if (tfs_cmd->parsed()) return cmd_tfs(g, fa, out);
        if (fit->parsed()) return cmd_fit_weights(g, wa, out);
        if (sweep->parsed()) return cmd_sweep(g, sa, out);
        if (all->parsed()) return cmd_run_all(g, out);
    } catch (const Error& e) {
        err << "error [" << stage << "] " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        err << "error [" << stage << "] malformed JSON: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error [" << stage << "] " << e.what() << '\n';
        return kExitPipeline;
    }
    return usage("no subcommand given");
}

}  // namespace tfs::cli
