#include <doctest.h>

#include "tfs/error.hpp"
#include "tfs/eval_harness.hpp"
#include "tfs/serialization.hpp"

using namespace tfs;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c = ExperimentConfig::desk_default();
    c.name = "small";
    c.data.synth->benign.count = 400;
    c.data.synth->malicious.count = 100;
    c.target.n_estimators = 15;
    c.surrogate.hidden_layers = {32, 32};
    c.surrogate.epochs = 8;
    c.attack.max_iterations = 40;
    return c;
}

FlowRecord row(double v, Label l) {
    FlowRecord r;
    r.values.fill(v);
    r.label = l;
    return r;
}

ClassifierModel threshold_model() {
    // malicious iff Duration > 0.5
    return ClassifierModel({Feature::duration},
                           RandomForest({}, {DecisionTree::stump(0, 0.5, Label::benign, Label::malicious)}));
}

}  // namespace

TEST_CASE("classification report from counts") {
    const auto perfect = ClassificationReport::from_confusion({{{40, 0}, {0, 10}}});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.f1[0] == 1.0);
    CHECK(perfect.f1[1] == 1.0);

    const auto all_benign = ClassificationReport::from_confusion({{{50, 0}, {50, 0}}});
    CHECK(all_benign.accuracy == 0.5);
    CHECK(all_benign.recall[1] == 0.0);
    CHECK(all_benign.precision[1] == 0.0);
    CHECK(all_benign.f1[1] == 0.0);
    CHECK(all_benign.precision[0] == 0.5);

    const auto paper_like = ClassificationReport::from_confusion({{{98, 2}, {0, 100}}});
    CHECK(paper_like.recall[0] == doctest::Approx(0.98).epsilon(1e-15));
    CHECK(paper_like.precision[1] == doctest::Approx(100.0 / 102.0).epsilon(1e-15));
    CHECK(paper_like.total() == 200);
}

TEST_CASE("classification report of a model") {
    Dataset d;
    d.rows = {row(0.1, Label::benign), row(0.2, Label::benign), row(0.9, Label::malicious), row(0.4, Label::malicious)};
    const auto r = classification_report(threshold_model(), d);
    CHECK(r.confusion[0][0] == 2);
    CHECK(r.confusion[1][0] == 1);
    CHECK(r.confusion[1][1] == 1);
    CHECK(r.accuracy == 0.75);
    CHECK_THROWS_AS(classification_report(threshold_model(), Dataset{}), Error);
}

TEST_CASE("transfer evaluation") {
    Dataset d;
    d.rows = {row(0.1, Label::benign), row(0.9, Label::malicious), row(0.8, Label::malicious)};
    const ClassifierModel m = threshold_model();

    const auto none = transfer_evaluate(m, d, {});
    CHECK(none.clean == none.adversarial);
    CHECK(none.attacked == 0);
    CHECK(none.attack_success_rate == 0.0);

    AttackResult evade{1, d.rows[1], row(0.3, Label::malicious), true, 1, 1, Label::benign};
    AttackResult stuck{2, d.rows[2], row(0.7, Label::malicious), false, 5, std::nullopt, Label::malicious};
    const std::vector<AttackResult> results{evade, stuck};
    const auto ev = transfer_evaluate(m, d, results);
    CHECK(ev.attacked == 2);
    CHECK(ev.evaded == 1);
    CHECK(ev.attack_success_rate == 0.5);
    CHECK(ev.clean.recall[1] == 1.0);
    CHECK(ev.adversarial.recall[1] == 0.5);

    AttackResult wrong = evade;
    wrong.row_index = 0;
    CHECK_THROWS_AS(transfer_evaluate(m, d, std::vector<AttackResult>{wrong}), Error);
}

TEST_CASE("self-transfer of surrogate successes always succeeds") {
    ExperimentRun run = run_experiment_full(small_config());
    std::vector<AttackResult> wins;
    for (const auto& r : run.results) {
        if (r.success) wins.push_back(r);
    }
    REQUIRE_FALSE(wins.empty());
    const auto ev = transfer_evaluate(*run.surrogate, run.test, wins);
    CHECK(ev.attack_success_rate == 1.0);
}

TEST_CASE("experiments are reproducible to the byte") {
    const ExperimentConfig c = small_config();
    const std::string a = json(run_experiment(c)).dump(2);
    const std::string b = json(run_experiment(c)).dump(2);
    CHECK(a == b);
}

TEST_CASE("full overlap gives identical training distributions") {
    const ExperimentReport r = run_experiment(small_config());
    CHECK(r.tfs_components.d_hom == 1.0);
    CHECK(r.tfs_components.f_align == doctest::Approx(4.0 / 6.0));
    CHECK(r.tfs == doctest::Approx(compute_tfs(r.tfs_components, r.weights_used)).epsilon(1e-15));
    CHECK(r.clean_report.accuracy >= 0.9);
    CHECK(r.attacked == r.clean_report.confusion[1][0] + r.clean_report.confusion[1][1]);
    CHECK(r.surrogate_train_rows == r.target_train_rows);
}

TEST_CASE("partial overlap lowers homogeneity") {
    ExperimentConfig c = small_config();
    c.surrogate_data.overlap = 0.0;
    c.surrogate_data.pool_synth = c.data.synth;
    c.surrogate_data.pool_synth->benign.base[0].mean = 2.0;
    const ExperimentReport r = run_experiment(c);
    CHECK(r.tfs_components.d_hom < 1.0);
    CHECK(r.surrogate_train_rows == r.target_train_rows);
}

TEST_CASE("a surrogate on a disjoint feature space cannot be attacked through") {
    ExperimentConfig c = small_config();
    c.target_features = {Feature::duration, Feature::tot_pkts};
    c.surrogate_features = {Feature::bytes_per_sec, Feature::ratio_out_in};
    try {
        run_experiment(c);
        FAIL("expected an attack-stage error");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(what.rfind("attack: ", 0) == 0);
        CHECK(what.find("feature-space mismatch") != std::string::npos);
    }
    const ClassifierModel s({Feature::bytes_per_sec}, RandomForest({}, {DecisionTree::constant(Label::benign)}));
    const ClassifierModel t({Feature::duration}, RandomForest({}, {DecisionTree::constant(Label::benign)}));
    Dataset d;
    d.scaler = ScalerParams{};
    d.rows = {row(0.1, Label::benign)};
    CHECK(compute_components(s, t, d, d).f_align == 0.0);
}

TEST_CASE("config validation") {
    ExperimentConfig c = small_config();
    c.data.csv = "flows.csv";
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.surrogate_data.overlap = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.train_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    try {
        c = small_config();
        c.surrogate.learning_rate = -1;
        run_experiment(c);
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("config: ", 0) == 0);
    }
}

TEST_CASE("pearson correlation") {
    const std::vector<double> x{0.1, 0.4, 0.5, 0.9};
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(3.0 * v - 0.2);
        z.push_back(-v);
    }
    CHECK(pearson_r(x, y) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pearson_r(x, z) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK_THROWS_AS(pearson_r(x, std::vector<double>(4, 0.3)), Error);
    CHECK_THROWS_AS(pearson_r(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
}

TEST_CASE("sweep preconditions") {
    const std::vector<ExperimentConfig> same(2, small_config());
    try {
        run_sweep(same, false, true);
        FAIL("expected a degenerate sweep");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("degenerate sweep") != std::string::npos);
    }
    CHECK_THROWS_AS(run_sweep(std::vector<ExperimentConfig>{small_config()}, false, true), Error);

    std::vector<ExperimentConfig> two(2, small_config());
    two[1].surrogate.hidden_layers = {16};
    try {
        run_sweep(two, true, true);
        FAIL("expected rank deficiency");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numeric);
        CHECK(std::string(e.what()).find("at least 3 observations") != std::string::npos);
    }
}

TEST_CASE("summary tables mention every component") {
    const ExperimentReport r = run_experiment(small_config());
    const std::string t = summary_table(r);
    for (const char* key : {"f_align", "a_sim", "d_hom", "TFS", "malicious recall", "benign precision"}) {
        CHECK(t.find(key) != std::string::npos);
    }
}
