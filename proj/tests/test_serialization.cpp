#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tfs/error.hpp"
#include "tfs/serialization.hpp"

using namespace tfs;
namespace fs = std::filesystem;

namespace {

fs::path temp(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tfs_serialization_tests";
    fs::create_directories(dir);
    return dir / name;
}

Dataset small_data() {
    SynthSpec spec = SynthSpec::desk_default();
    spec.benign.count = 120;
    spec.malicious.count = 60;
    return preprocess(synthesize_flows(spec, 4), {});
}

template <typename T>
T round_trip(const T& v) {
    return json::parse(json(v).dump()).get<T>();
}

}  // namespace

TEST_CASE("datasets survive a round trip exactly") {
    const Dataset d = small_data();
    const Dataset back = round_trip(d);
    CHECK(back.rows == d.rows);
    CHECK(back.scaler == d.scaler);
    const json j = d;
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["feature_names"].size() == 7);

    Dataset raw = remove_scaler(d);
    raw.rows[0].protocol.reset();
    const Dataset raw_back = round_trip(raw);
    CHECK_FALSE(raw_back.normalized());
    CHECK_FALSE(raw_back.rows[0].protocol.has_value());
}

TEST_CASE("artifacts are checked for kind and version") {
    json j = small_data();
    j["schema_version"] = 99;
    CHECK_THROWS_AS(j.get<Dataset>(), Error);
    json k = artifact("model");
    CHECK_THROWS_AS(check_artifact(k, "dataset"), Error);
    CHECK_NOTHROW(check_artifact(k, "model"));
}

TEST_CASE("models survive a round trip with identical predictions") {
    const Dataset d = small_data();
    RandomForestParams rp;
    rp.n_estimators = 9;
    rp.seed = 3;
    const ClassifierModel rf = train_random_forest(d, {Feature::duration, Feature::in_bytes, Feature::pkts_per_sec}, rp);
    MlpParams mp;
    mp.hidden_layers = {8, 4};
    mp.epochs = 2;
    const ClassifierModel mlp = train_mlp(d, std::vector<Feature>(kBaseFeatures.begin(), kBaseFeatures.end()), mp);

    for (const ClassifierModel* m : {&rf, &mlp}) {
        const json j = model_to_json(*m);
        const ClassifierModel back = model_from_json(json::parse(j.dump()));
        CHECK(back.family() == m->family());
        CHECK(back.features() == m->features());
        CHECK(back.descriptor() == m->descriptor());
        for (const FlowRecord& r : d.rows) REQUIRE(back.predict(r).probabilities == m->predict(r).probabilities);
        CHECK(model_to_json(back).dump() == j.dump());
    }
    CHECK(model_from_json(model_to_json(rf)).forest()->params().n_estimators == 9);
    CHECK(model_from_json(model_to_json(mlp)).mlp_params()->hidden_layers == mp.hidden_layers);
}

TEST_CASE("a tampered model artifact is rejected") {
    const Dataset d = small_data();
    RandomForestParams rp;
    rp.n_estimators = 3;
    json j = model_to_json(train_random_forest(d, {Feature::duration}, rp));
    j["descriptor"][2] = 4.0;
    CHECK_THROWS_AS(model_from_json(j), Error);
    j = model_to_json(train_random_forest(d, {Feature::duration}, rp));
    j["family"] = "svm";
    CHECK_THROWS_AS(model_from_json(j), Error);
    j = model_to_json(train_random_forest(d, {Feature::duration}, rp));
    j["trees"][0][0] = json::array({0, 0.5, 0, 0, 0});
    CHECK_THROWS_AS(model_from_json(j), Error);
}

TEST_CASE("attack results round-trip through JSONL") {
    FlowRecord a;
    a.values = {1, 2, 3, 4, 5, 6, 7};
    a.label = Label::malicious;
    a.protocol = 6;
    FlowRecord b = a;
    b.values[0] = 0.5;
    const std::vector<AttackResult> results{{3, a, b, true, 2, 7, Label::benign},
                                            {5, a, a, false, 100, std::nullopt, Label::malicious}};
    const fs::path p = temp("results.jsonl");
    write_attack_results(p, results);
    CHECK(read_attack_results(p) == results);

    std::ofstream(p, std::ios::app) << "{not json}\n";
    CHECK_THROWS_AS(read_attack_results(p), Error);
}

TEST_CASE("experiment reports and sweeps round-trip") {
    ExperimentReport r;
    r.name = "x";
    r.clean_report = ClassificationReport::from_confusion({{{90, 3}, {2, 5}}});
    r.adversarial_report = ClassificationReport::from_confusion({{{90, 3}, {6, 1}}});
    r.attacked = 7;
    r.evaded = 4;
    r.attack_success_rate = 4.0 / 7.0;
    r.surrogate_success_rate = 1.0;
    r.tfs_components = {0.5, -0.25, 0.75};
    r.homogeneity = {{Feature::duration, Feature::out_bytes}, {0.1, 0.5}, 0.3, 1.0 / 1.3};
    r.surrogate_descriptor = {1, 3, 128, 4.5, 2};
    r.target_descriptor = {0, 20, 200, 4.1, 2};
    r.weights_used = {0.2, 0.3, 0.5};
    r.tfs = compute_tfs(r.tfs_components, r.weights_used);
    r.config = ExperimentConfig::desk_default();
    r.config.attack.magnitude_mode = MagnitudeMode::mean_ratio;
    r.config.target.max_depth = 12;

    const ExperimentReport back = round_trip(r);
    CHECK(json(back).dump() == json(r).dump());
    CHECK(back.homogeneity.distances == r.homogeneity.distances);
    CHECK(back.config.attack == r.config.attack);
    CHECK(back.config.target.max_depth == 12u);

    SweepResult s;
    s.reports = {r, r};
    s.pearson_r = 0.25;
    s.fit = WeightFit{{0.1, 0.2, 0.7}, true, 0.01, 12.0, {"a_sim"}};
    const SweepResult sb = round_trip(s);
    CHECK(json(sb).dump() == json(s).dump());
    CHECK(sweep_csv(s).rfind("name,f_align,a_sim,d_hom,tfs,asr\n", 0) == 0);
}

TEST_CASE("experiment config from partial JSON") {
    const json j = json::parse(R"({
        "name": "demo",
        "data": {"synth": {"malicious": {"count": 50, "duration": {"mean": 0.3}}}},
        "target": {"features": ["Duration", "TotPkts"], "params": {"n_estimators": 10}},
        "surrogate_data": {"overlap": 0.5, "pool_csv": "pool.csv"},
        "attack": {"magnitude_mode": "ratio", "max_iterations": 5},
        "weights": "0.2,0.3,0.5",
        "seed": 9
    })");
    const ExperimentConfig c = experiment_config_from_json(j, "/data");
    CHECK(c.name == "demo");
    CHECK(c.data.synth->malicious.count == 50);
    CHECK(c.data.synth->malicious.base[0].mean == 0.3);
    CHECK(c.data.synth->malicious.base[0].sigma == SynthSpec::desk_default().malicious.base[0].sigma);
    CHECK(c.data.synth->benign.count == SynthSpec::desk_default().benign.count);
    CHECK(c.target_features == std::vector<Feature>{Feature::duration, Feature::tot_pkts});
    CHECK(c.target.n_estimators == 10);
    CHECK(c.surrogate.hidden_layers == std::vector<std::size_t>{128, 128, 128});
    CHECK(c.surrogate_data.pool_csv == fs::path("/data/pool.csv"));
    CHECK(c.attack.magnitude_mode == MagnitudeMode::mean_ratio);
    CHECK(c.weights == TfsWeights{0.2, 0.3, 0.5});
    CHECK(c.seed == 9);

    const ExperimentConfig empty = experiment_config_from_json(json::object(), {});
    CHECK(empty.data.synth.has_value());
    CHECK_THROWS_AS(experiment_config_from_json(json::array(), {}), Error);
}

TEST_CASE("column schema from JSON overrides the defaults") {
    ColumnSchema s = ColumnSchema::defaults();
    json::parse(R"({"columns": {"TotPkts": ["Fwd", "Bwd"], "label": "Class"}, "label_map": {"normal": "benign"}})")
        .get_to(s);
    CHECK(s.columns["totpkts"] == std::vector<std::string>{"Fwd", "Bwd"});
    CHECK(s.columns["label"] == std::vector<std::string>{"Class"});
    CHECK(s.label_map["normal"] == Label::benign);
}

TEST_CASE("weight parsing") {
    CHECK(parse_weights("0.33,0.33,0.34") == TfsWeights{0.33, 0.33, 0.34});
    CHECK_THROWS_AS(parse_weights("0.5,0.5"), Error);
    CHECK_THROWS_AS(parse_weights("a,b,c"), Error);
    CHECK_THROWS_AS(parse_weights("0.1x,0.2,0.3"), Error);
}

TEST_CASE("reading files") {
    CHECK_THROWS_AS(read_json(temp("does-not-exist.json")), Error);
    const fs::path p = temp("broken.json");
    std::ofstream(p) << "{";
    CHECK_THROWS_AS(read_json(p), Error);
}
