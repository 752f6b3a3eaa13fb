#include "tfs/serialization.hpp"

#include <fstream>
#include <sstream>

#include "tfs/error.hpp"

namespace tfs {

namespace {

constexpr std::array<const char*, kBaseFeatureCount> kBaseKeys = {"duration", "tot_pkts", "in_bytes", "out_bytes"};

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

json class_profile_to_json(const ClassProfile& p) {
    json j{{"count", p.count}};
    for (std::size_t i = 0; i < kBaseFeatureCount; ++i) {
        j[kBaseKeys[i]] = {{"mean", p.base[i].mean}, {"sigma", p.base[i].sigma}};
    }
    return j;
}

void class_profile_from_json(const json& j, ClassProfile& p) {
    get_if_present(j, "count", p.count);
    for (std::size_t i = 0; i < kBaseFeatureCount; ++i) {
        if (auto it = j.find(kBaseKeys[i]); it != j.end()) {
            get_if_present(*it, "mean", p.base[i].mean);
            get_if_present(*it, "sigma", p.base[i].sigma);
        }
    }
}

json descriptor_to_json(const ArchitectureDescriptor& d) { return json(std::vector<double>(d.begin(), d.end())); }

ArchitectureDescriptor descriptor_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != ArchitectureDescriptor{}.size()) throw input_error("descriptor must have 5 entries");
    ArchitectureDescriptor d{};
    std::copy(v.begin(), v.end(), d.begin());
    return d;
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

json artifact(std::string_view kind) { return json{{"schema_version", kSchemaVersion}, {"kind", kind}}; }

void check_artifact(const json& j, std::string_view kind) {
    if (!j.is_object()) throw input_error("artifact is not a JSON object");
    const auto version = j.value("schema_version", -1);
    if (version != kSchemaVersion) {
        throw input_error("unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    }
    const std::string found = j.value("kind", "");
    if (found != kind) throw input_error("expected a '" + std::string(kind) + "' artifact, found '" + found + "'");
}

void to_json(json& j, Label l) { j = label_name(l); }

void from_json(const json& j, Label& l) {
    const std::string s = j.get<std::string>();
    if (s == "benign") l = Label::benign;
    else if (s == "malicious") l = Label::malicious;
    else throw input_error("unknown label '" + s + "'");
}

void to_json(json& j, const FlowRecord& r) {
    j = json{{"values", r.values}, {"label", r.label}};
    if (r.protocol) j["protocol"] = *r.protocol;
}

void from_json(const json& j, FlowRecord& r) {
    const auto v = j.at("values").get<std::vector<double>>();
    if (v.size() != kFeatureCount) throw input_error("flow record must carry 7 values");
    std::copy(v.begin(), v.end(), r.values.begin());
    r.label = j.at("label").get<Label>();
    r.protocol.reset();
    if (j.contains("protocol") && !j["protocol"].is_null()) r.protocol = j["protocol"].get<int>();
}

void to_json(json& j, const ScalerParams& s) {
    j = json::object();
    for (Feature f : kAllFeatures) {
        j[std::string(feature_name(f))] = {s.min[index_of(f)], s.max[index_of(f)]};
    }
}

void from_json(const json& j, ScalerParams& s) {
    for (Feature f : kAllFeatures) {
        const auto mm = j.at(std::string(feature_name(f))).get<std::array<double, 2>>();
        if (!(mm[1] >= mm[0])) throw input_error("scaler max < min for " + std::string(feature_name(f)));
        s.min[index_of(f)] = mm[0];
        s.max[index_of(f)] = mm[1];
    }
}

void to_json(json& j, const Dataset& d) {
    j = artifact("dataset");
    j["feature_names"] = features_to_json({kAllFeatures.begin(), kAllFeatures.end()});
    j["scaler"] = d.scaler ? json(*d.scaler) : json(nullptr);
    j["rows"] = d.rows;
}

void from_json(const json& j, Dataset& d) {
    check_artifact(j, "dataset");
    if (features_from_json(j.at("feature_names")) != std::vector<Feature>(kAllFeatures.begin(), kAllFeatures.end())) {
        throw input_error("dataset feature_names differ from the seven modeled features");
    }
    d.scaler.reset();
    if (!j.at("scaler").is_null()) d.scaler = j["scaler"].get<ScalerParams>();
    d.rows = j.at("rows").get<std::vector<FlowRecord>>();
}

void to_json(json& j, const ColumnSchema& s) {
    j = json{{"columns", s.columns}, {"duration_scale", s.duration_scale}};
    json lm = json::object();
    for (const auto& [k, v] : s.label_map) lm[k] = v;
    j["label_map"] = lm;
}

void from_json(const json& j, ColumnSchema& s) {
    if (auto it = j.find("columns"); it != j.end()) {
        for (const auto& [key, val] : it->items()) {
            s.columns[canonical_name(key)] = val.is_array() ? val.get<std::vector<std::string>>()
                                            : std::vector<std::string>{val.get<std::string>()};
        }
    }
    get_if_present(j, "duration_scale", s.duration_scale);
    if (auto it = j.find("label_map"); it != j.end()) {
        for (const auto& [key, val] : it->items()) s.label_map[key] = val.get<Label>();
    }
}

void to_json(json& j, const SynthSpec& s) {
    j = json{{"benign", class_profile_to_json(s.benign)}, {"malicious", class_profile_to_json(s.malicious)}};
}

void from_json(const json& j, SynthSpec& s) {
    if (j.is_string() && j.get<std::string>() == "default") {
        s = SynthSpec::desk_default();
        return;
    }
    if (auto it = j.find("benign"); it != j.end()) class_profile_from_json(*it, s.benign);
    if (auto it = j.find("malicious"); it != j.end()) class_profile_from_json(*it, s.malicious);
}

void to_json(json& j, const PreprocessOptions& o) { j = json{{"tcp_only", o.tcp_only}, {"normalize", o.normalize}}; }

void from_json(const json& j, PreprocessOptions& o) {
    get_if_present(j, "tcp_only", o.tcp_only);
    get_if_present(j, "normalize", o.normalize);
}

void to_json(json& j, const RandomForestParams& p) {
    j = json{{"n_estimators", p.n_estimators},
             {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
             {"min_samples_split", p.min_samples_split},
             {"seed", p.seed}};
}

void from_json(const json& j, RandomForestParams& p) {
    get_if_present(j, "n_estimators", p.n_estimators);
    if (j.contains("max_depth")) {
        p.max_depth = j["max_depth"].is_null() ? std::nullopt : std::optional<std::size_t>(j["max_depth"].get<std::size_t>());
    }
    get_if_present(j, "min_samples_split", p.min_samples_split);
    get_if_present(j, "seed", p.seed);
}

void to_json(json& j, const MlpParams& p) {
    j = json{{"hidden_layers", p.hidden_layers}, {"dropout_rate", p.dropout_rate}, {"learning_rate", p.learning_rate},
             {"epochs", p.epochs},               {"batch_size", p.batch_size},     {"seed", p.seed}};
}

void from_json(const json& j, MlpParams& p) {
    get_if_present(j, "hidden_layers", p.hidden_layers);
    get_if_present(j, "dropout_rate", p.dropout_rate);
    get_if_present(j, "learning_rate", p.learning_rate);
    get_if_present(j, "epochs", p.epochs);
    get_if_present(j, "batch_size", p.batch_size);
    get_if_present(j, "seed", p.seed);
}

void to_json(json& j, const AttackConfig& c) {
    j = json{{"magnitude_mode", mode_name(c.magnitude_mode)},
             {"scaling_constant", c.scaling_constant},
             {"max_iterations", c.max_iterations},
             {"perturbable_features", features_to_json(c.perturbable_features)},
             {"ratio_guard", c.ratio_guard},
             {"reset_per_mask", c.reset_per_mask}};
}

void from_json(const json& j, AttackConfig& c) {
    if (j.contains("magnitude_mode")) c.magnitude_mode = parse_mode(j["magnitude_mode"].get<std::string>());
    get_if_present(j, "scaling_constant", c.scaling_constant);
    get_if_present(j, "max_iterations", c.max_iterations);
    if (j.contains("perturbable_features")) c.perturbable_features = features_from_json(j["perturbable_features"]);
    get_if_present(j, "ratio_guard", c.ratio_guard);
    get_if_present(j, "reset_per_mask", c.reset_per_mask);
}

void to_json(json& j, const AttackResult& r) {
    j = json{{"schema_version", kSchemaVersion},
             {"row_index", r.row_index},
             {"original", r.original},
             {"adversarial", r.adversarial},
             {"success", r.success},
             {"iterations_used", r.iterations_used},
             {"mask_used", r.mask_used ? json(*r.mask_used) : json(nullptr)},
             {"surrogate_label_after", r.surrogate_label_after}};
}

void from_json(const json& j, AttackResult& r) {
    if (j.value("schema_version", -1) != kSchemaVersion) throw input_error("attack result: unsupported schema_version");
    r.row_index = j.at("row_index").get<std::size_t>();
    r.original = j.at("original").get<FlowRecord>();
    r.adversarial = j.at("adversarial").get<FlowRecord>();
    r.success = j.at("success").get<bool>();
    r.iterations_used = j.at("iterations_used").get<std::size_t>();
    r.mask_used = j.at("mask_used").is_null() ? std::nullopt : std::optional<std::size_t>(j["mask_used"].get<std::size_t>());
    r.surrogate_label_after = j.at("surrogate_label_after").get<Label>();
}

void to_json(json& j, const TfsComponents& c) { j = json{{"f_align", c.f_align}, {"a_sim", c.a_sim}, {"d_hom", c.d_hom}}; }

void from_json(const json& j, TfsComponents& c) {
    c.f_align = j.at("f_align").get<double>();
    c.a_sim = j.at("a_sim").get<double>();
    c.d_hom = j.at("d_hom").get<double>();
}

void to_json(json& j, const TfsWeights& w) {
    j = json{{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}, {"sum", w.sum()}};
}

void from_json(const json& j, TfsWeights& w) {
    w.alpha = j.at("alpha").get<double>();
    w.beta = j.at("beta").get<double>();
    w.gamma = j.at("gamma").get<double>();
}

void to_json(json& j, const WeightFit& f) {
    j = json{{"weights", f.weights},
             {"constrained", f.constrained},
             {"sse", f.sse},
             {"condition_number", f.condition_number},
             {"dropped_columns", f.dropped_columns}};
}

void from_json(const json& j, WeightFit& f) {
    f.weights = j.at("weights").get<TfsWeights>();
    f.constrained = j.at("constrained").get<bool>();
    f.sse = j.at("sse").get<double>();
    f.condition_number = j.at("condition_number").get<double>();
    f.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
}

void to_json(json& j, const HomogeneityDetail& h) {
    json per = json::object();
    for (std::size_t i = 0; i < h.features.size(); ++i) per[std::string(feature_name(h.features[i]))] = h.distances[i];
    j = json{{"per_feature_wasserstein", per}, {"mean_wasserstein", h.mean_distance}, {"d_hom", h.d_hom}};
}

void from_json(const json& j, HomogeneityDetail& h) {
    h.features.clear();
    h.distances.clear();
    for (Feature f : kAllFeatures) {
        const auto& per = j.at("per_feature_wasserstein");
        if (auto it = per.find(std::string(feature_name(f))); it != per.end()) {
            h.features.push_back(f);
            h.distances.push_back(it->get<double>());
        }
    }
    h.mean_distance = j.at("mean_wasserstein").get<double>();
    h.d_hom = j.at("d_hom").get<double>();
}

void to_json(json& j, const ClassificationReport& r) {
    j = json{{"accuracy", r.accuracy}, {"confusion", r.confusion}};
    for (Label l : {Label::benign, Label::malicious}) {
        const auto k = static_cast<std::size_t>(l);
        j[std::string(label_name(l))] = {{"precision", r.precision[k]}, {"recall", r.recall[k]}, {"f1", r.f1[k]}};
    }
}

void from_json(const json& j, ClassificationReport& r) {
    r = ClassificationReport::from_confusion(j.at("confusion").get<std::array<std::array<std::size_t, 2>, 2>>());
}

void to_json(json& j, const ExperimentConfig& c) {
    json data = json::object();
    if (c.data.csv) data["csv"] = c.data.csv->string();
    if (c.data.synth) data["synth"] = *c.data.synth;
    data["schema"] = c.data.schema;
    json pool{{"overlap", c.surrogate_data.overlap}};
    if (c.surrogate_data.pool_synth) pool["pool_synth"] = *c.surrogate_data.pool_synth;
    if (c.surrogate_data.pool_csv) pool["pool_csv"] = c.surrogate_data.pool_csv->string();
    j = json{{"name", c.name},
             {"data", data},
             {"preprocess", c.preprocess},
             {"train_fraction", c.train_fraction},
             {"target", {{"features", features_to_json(c.target_features)}, {"params", c.target}}},
             {"surrogate", {{"features", features_to_json(c.surrogate_features)}, {"params", c.surrogate}}},
             {"surrogate_data", pool},
             {"attack", c.attack},
             {"weights", c.weights},
             {"seed", c.seed}};
}

void from_json(const json& j, ExperimentConfig& c) { c = experiment_config_from_json(j, {}); }

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw input_error("experiment config must be a JSON object");
    ExperimentConfig c;
    c.target.seed = 1;
    c.surrogate.seed = 2;
    get_if_present(j, "name", c.name);
    if (auto it = j.find("data"); it != j.end()) {
        if (it->contains("csv")) c.data.csv = resolve((*it)["csv"].get<std::string>(), base_dir);
        if (it->contains("synth")) c.data.synth = SynthSpec::desk_default(), (*it)["synth"].get_to(*c.data.synth);
        if (it->contains("schema")) (*it)["schema"].get_to(c.data.schema);
    }
    if (auto it = j.find("preprocess"); it != j.end()) it->get_to(c.preprocess);
    get_if_present(j, "train_fraction", c.train_fraction);
    if (auto it = j.find("target"); it != j.end()) {
        if (it->contains("features")) c.target_features = features_from_json((*it)["features"]);
        if (it->contains("params")) (*it)["params"].get_to(c.target);
    }
    if (auto it = j.find("surrogate"); it != j.end()) {
        if (it->contains("features")) c.surrogate_features = features_from_json((*it)["features"]);
        if (it->contains("params")) (*it)["params"].get_to(c.surrogate);
    }
    if (auto it = j.find("surrogate_data"); it != j.end()) {
        get_if_present(*it, "overlap", c.surrogate_data.overlap);
        if (it->contains("pool_synth")) {
            c.surrogate_data.pool_synth = SynthSpec::desk_default();
            (*it)["pool_synth"].get_to(*c.surrogate_data.pool_synth);
        }
        if (it->contains("pool_csv")) c.surrogate_data.pool_csv = resolve((*it)["pool_csv"].get<std::string>(), base_dir);
    }
    if (auto it = j.find("attack"); it != j.end()) it->get_to(c.attack);
    if (auto it = j.find("weights"); it != j.end()) {
        c.weights = it->is_string() ? parse_weights(it->get<std::string>()) : it->get<TfsWeights>();
    }
    get_if_present(j, "seed", c.seed);
    if (!c.data.csv && !c.data.synth) c.data.synth = SynthSpec::desk_default();
    return c;
}

void to_json(json& j, const ExperimentReport& r) {
    j = artifact("experiment_report");
    j["name"] = r.name;
    j["clean_report"] = r.clean_report;
    j["adversarial_report"] = r.adversarial_report;
    j["attacked"] = r.attacked;
    j["evaded"] = r.evaded;
    j["attack_success_rate"] = r.attack_success_rate;
    j["surrogate_success_rate"] = r.surrogate_success_rate;
    j["tfs_components"] = r.tfs_components;
    j["homogeneity"] = r.homogeneity;
    j["surrogate_descriptor"] = descriptor_to_json(r.surrogate_descriptor);
    j["target_descriptor"] = descriptor_to_json(r.target_descriptor);
    j["tfs"] = r.tfs;
    j["weights_used"] = r.weights_used;
    j["rows"] = {{"target_train", r.target_train_rows}, {"surrogate_train", r.surrogate_train_rows}, {"test", r.test_rows}};
    j["config"] = r.config;
}

void from_json(const json& j, ExperimentReport& r) {
    check_artifact(j, "experiment_report");
    r.name = j.at("name").get<std::string>();
    r.clean_report = j.at("clean_report").get<ClassificationReport>();
    r.adversarial_report = j.at("adversarial_report").get<ClassificationReport>();
    r.attacked = j.at("attacked").get<std::size_t>();
    r.evaded = j.at("evaded").get<std::size_t>();
    r.attack_success_rate = j.at("attack_success_rate").get<double>();
    r.surrogate_success_rate = j.at("surrogate_success_rate").get<double>();
    r.tfs_components = j.at("tfs_components").get<TfsComponents>();
    r.homogeneity = j.at("homogeneity").get<HomogeneityDetail>();
    r.surrogate_descriptor = descriptor_from_json(j.at("surrogate_descriptor"));
    r.target_descriptor = descriptor_from_json(j.at("target_descriptor"));
    r.tfs = j.at("tfs").get<double>();
    r.weights_used = j.at("weights_used").get<TfsWeights>();
    r.target_train_rows = j.at("rows").at("target_train").get<std::size_t>();
    r.surrogate_train_rows = j.at("rows").at("surrogate_train").get<std::size_t>();
    r.test_rows = j.at("rows").at("test").get<std::size_t>();
    r.config = j.at("config").get<ExperimentConfig>();
}

void to_json(json& j, const SweepResult& s) {
    j = artifact("sweep_result");
    j["reports"] = s.reports;
    j["pearson_r"] = s.pearson_r;
    j["fit"] = s.fit ? json(*s.fit) : json(nullptr);
    j["fitted_pearson_r"] = s.fitted_pearson_r ? json(*s.fitted_pearson_r) : json(nullptr);
}

void from_json(const json& j, SweepResult& s) {
    check_artifact(j, "sweep_result");
    s.reports = j.at("reports").get<std::vector<ExperimentReport>>();
    s.pearson_r = j.at("pearson_r").get<double>();
    s.fit.reset();
    if (!j.at("fit").is_null()) s.fit = j["fit"].get<WeightFit>();
    s.fitted_pearson_r.reset();
    if (!j.at("fitted_pearson_r").is_null()) s.fitted_pearson_r = j["fitted_pearson_r"].get<double>();
}

json features_to_json(const std::vector<Feature>& fs) {
    json j = json::array();
    for (Feature f : fs) j.push_back(feature_name(f));
    return j;
}

std::vector<Feature> features_from_json(const json& j) {
    std::vector<Feature> out;
    if (j.is_string()) return parse_feature_list(j.get<std::string>());
    for (const auto& e : j) {
        auto f = parse_feature(e.get<std::string>());
        if (!f) throw input_error("unknown feature '" + e.get<std::string>() + "'");
        out.push_back(*f);
    }
    return canonical_order(std::move(out));
}

json model_to_json(const ClassifierModel& m) {
    json j = artifact("model");
    j["family"] = family_name(m.family());
    j["features"] = features_to_json(m.features());
    j["descriptor"] = descriptor_to_json(m.descriptor());
    if (const RandomForest* rf = m.forest()) {
        j["params"] = rf->params();
        json trees = json::array();
        for (const DecisionTree& t : rf->trees()) {
            json nodes = json::array();
            for (const TreeNode& n : t.nodes()) {
                nodes.push_back({n.feature, n.threshold, n.left, n.right, static_cast<int>(n.leaf_label)});
            }
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
    } else {
        j["params"] = *m.mlp_params();
        json layers = json::array();
        for (const DenseLayer& l : m.mlp()->layers()) {
            std::vector<double> w(static_cast<std::size_t>(l.weights.size()));
            for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
                for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
                    w[static_cast<std::size_t>(r * l.weights.cols() + c)] = l.weights(r, c);
                }
            }
            layers.push_back({{"rows", l.weights.rows()},
                              {"cols", l.weights.cols()},
                              {"weights", w},
                              {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
        }
        j["layers"] = std::move(layers);
    }
    return j;
}

ClassifierModel model_from_json(const json& j) {
    check_artifact(j, "model");
    try {
        const std::string family = j.at("family").get<std::string>();
        std::vector<Feature> features = features_from_json(j.at("features"));
        std::optional<ClassifierModel> m;
        if (family == "random_forest") {
            const auto params = j.at("params").get<RandomForestParams>();
            std::vector<DecisionTree> trees;
            for (const auto& tj : j.at("trees")) {
                std::vector<TreeNode> nodes;
                for (const auto& nj : tj) {
                    TreeNode n;
                    n.feature = nj.at(0).get<int>();
                    n.threshold = nj.at(1).get<double>();
                    n.left = nj.at(2).get<int>();
                    n.right = nj.at(3).get<int>();
                    n.leaf_label = nj.at(4).get<int>() == 0 ? Label::benign : Label::malicious;
                    nodes.push_back(n);
                }
                trees.emplace_back(std::move(nodes));
            }
            m.emplace(std::move(features), RandomForest(params, std::move(trees)));
        } else if (family == "mlp") {
            const auto params = j.at("params").get<MlpParams>();
            std::vector<DenseLayer> layers;
            for (const auto& lj : j.at("layers")) {
                const auto rows = lj.at("rows").get<Eigen::Index>();
                const auto cols = lj.at("cols").get<Eigen::Index>();
                const auto w = lj.at("weights").get<std::vector<double>>();
                const auto b = lj.at("bias").get<std::vector<double>>();
                if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
                    throw input_error("model: layer shape does not match its data");
                }
                DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
                for (Eigen::Index r = 0; r < rows; ++r) {
                    for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
                    l.bias(r) = b[static_cast<std::size_t>(r)];
                }
                layers.push_back(std::move(l));
            }
            m.emplace(std::move(features), Mlp(std::move(layers)), params);
        } else {
            throw input_error("model: unknown family '" + family + "'");
        }
        if (m->descriptor() != descriptor_from_json(j.at("descriptor"))) {
            throw input_error("model: stored descriptor does not match the trained state");
        }
        return std::move(*m);
    } catch (const json::exception& e) {
        throw input_error(std::string("model: malformed artifact: ") + e.what());
    }
}

TfsWeights parse_weights(std::string_view csv) {
    std::vector<double> v;
    std::stringstream ss{std::string(csv)};
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw input_error("weights: '" + tok + "' is not a number");
        }
    }
    if (v.size() != 3) throw input_error("weights: expected three comma-separated values alpha,beta,gamma");
    return {v[0], v[1], v[2]};
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw input_error("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::pipeline, "cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_attack_results(const std::filesystem::path& path, const std::vector<AttackResult>& results) {
    std::string text;
    for (const AttackResult& r : results) text += json(r).dump() + "\n";
    write_text(path, text);
}

std::vector<AttackResult> read_attack_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path.string() + "'");
    std::vector<AttackResult> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line).get<AttackResult>());
        } catch (const json::exception& e) {
            throw input_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string sweep_csv(const SweepResult& s) {
    std::ostringstream out;
    out.precision(17);
    out << "name,f_align,a_sim,d_hom,tfs,asr\n";
    for (const ExperimentReport& r : s.reports) {
        out << r.name << ',' << r.tfs_components.f_align << ',' << r.tfs_components.a_sim << ','
            << r.tfs_components.d_hom << ',' << r.tfs << ',' << r.attack_success_rate << '\n';
    }
    return out.str();
}

}  // namespace tfs
