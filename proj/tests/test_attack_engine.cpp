#include <doctest.h>

#include <cmath>
#include <random>

#include "tfs/attack_engine.hpp"
#include "tfs/error.hpp"

using namespace tfs;

namespace {

const std::vector<Feature> kBase(kBaseFeatures.begin(), kBaseFeatures.end());

ClassifierModel constant_model(Label l, std::vector<Feature> features = kBase) {
    return ClassifierModel(std::move(features), RandomForest({}, {DecisionTree::constant(l)}));
}

FlowRecord flow(double dur, double pkts, double in, double out, Label l = Label::malicious) {
    FlowRecord r;
    r[Feature::duration] = dur;
    r[Feature::tot_pkts] = pkts;
    r[Feature::in_bytes] = in;
    r[Feature::out_bytes] = out;
    r.label = l;
    r.protocol = kProtocolTcp;
    derive_features(r);
    return r;
}

ClassMeans means() {
    ClassMeans cm;
    cm.benign = {10.0, 40.0, 2000.0, 500.0, 0, 0, 0};
    cm.malicious = {1.0, 10.0, 300.0, 100.0, 0, 0, 0};
    return cm;
}

Dataset training_set(std::uint64_t seed) {
    SynthSpec spec = SynthSpec::desk_default();
    spec.benign.count = 300;
    spec.malicious.count = 300;
    return preprocess(synthesize_flows(spec, seed), {});
}

}  // namespace

TEST_CASE("four perturbable features give fifteen ordered masks") {
    const auto masks = enumerate_masks(4);
    const std::vector<std::uint32_t> expected{1, 2, 4, 8, 3, 5, 9, 6, 10, 12, 7, 11, 13, 14, 15};
    CHECK(masks == expected);
    CHECK(enumerate_masks(1) == std::vector<std::uint32_t>{1});
    CHECK(enumerate_masks(3).size() == 7);
    CHECK(enumerate_masks(10).size() == 1023);
    CHECK_THROWS_AS(enumerate_masks(0), Error);
}

TEST_CASE("class means") {
    Dataset d;
    d.rows = {flow(0.2, 1, 1, 1, Label::benign), flow(0.4, 1, 1, 1, Label::benign), flow(5, 1, 1, 1)};
    const ClassMeans cm = class_means(d);
    CHECK(cm.benign[0] == doctest::Approx(0.3));
    CHECK(cm.malicious[0] == 5.0);
    d.rows.pop_back();
    CHECK_THROWS_AS(class_means(d), Error);
}

TEST_CASE("identical class distributions give zero difference magnitude") {
    Dataset d;
    for (double v : {0.1, 0.5, 0.7}) {
        d.rows.push_back(flow(v, v, v, v, Label::benign));
        d.rows.push_back(flow(v, v, v, v, Label::malicious));
    }
    const ClassMeans cm = class_means(d);
    for (Feature f : kAllFeatures) CHECK(perturbation_magnitude(cm, MagnitudeMode::mean_difference, f) == 0.0);
}

TEST_CASE("class means of synthetic flows match the configured means") {
    SynthSpec spec = SynthSpec::desk_default();
    spec.benign.count = 4000;
    spec.malicious.count = 4000;
    const ClassMeans cm = class_means(synthesize_flows(spec, 77));
    for (Feature f : kBaseFeatures) {
        for (const auto& [profile, mean] : {std::pair{spec.benign, cm.benign}, std::pair{spec.malicious, cm.malicious}}) {
            const LogNormalParams p = profile.base[index_of(f)];
            const double se = p.mean * std::sqrt(std::exp(p.sigma * p.sigma) - 1.0) / std::sqrt(4000.0);
            CHECK(std::abs(mean[index_of(f)] - p.mean) < 3.0 * se);
        }
    }
}

TEST_CASE("perturbation magnitude") {
    ClassMeans cm;
    cm.benign[0] = 0.8;
    cm.malicious[0] = 0.3;
    cm.benign[1] = 0.6;
    cm.malicious[1] = 0.2;
    cm.benign[2] = cm.malicious[2] = 0.4;
    CHECK(perturbation_magnitude(cm, MagnitudeMode::mean_difference, Feature::duration) == doctest::Approx(0.5));
    CHECK(perturbation_magnitude(cm, MagnitudeMode::mean_ratio, Feature::tot_pkts, 1e-6) ==
          doctest::Approx(0.6 / (0.2 + 1e-6)).epsilon(1e-12));
    CHECK(perturbation_magnitude(cm, MagnitudeMode::mean_ratio, Feature::tot_pkts) == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(perturbation_magnitude(cm, MagnitudeMode::mean_difference, Feature::in_bytes) == 0.0);
}

TEST_CASE("projection examples") {
    const ProjectionBounds b = ProjectionBounds::raw_defaults();
    const FlowRecord valid = flow(2.0, 10.0, 100.0, 40.0);
    CHECK(project(valid, b) == valid);

    FlowRecord neg = valid;
    neg[Feature::duration] = -0.5;
    const FlowRecord p = project(neg, b);
    CHECK(p[Feature::duration] == 1e-6);
    CHECK(p[Feature::pkts_per_sec] == doctest::Approx(10.0 / 1e-6));
    CHECK(p[Feature::bytes_per_sec] == doctest::Approx(140.0 / 1e-6));

    FlowRecord doubled = valid;
    doubled[Feature::in_bytes] *= 2.0;
    const FlowRecord q = project(doubled, b);
    CHECK(q[Feature::ratio_out_in] == doctest::Approx(40.0 / (200.0 + 1e-6)).epsilon(1e-15));
    CHECK(q[Feature::bytes_per_sec] == doctest::Approx(240.0 / 2.0));
}

TEST_CASE("projection is idempotent and keeps derived features consistent") {
    const Dataset train = training_set(3);
    const ProjectionBounds b = ProjectionBounds::from_training(train);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int i = 0; i < 500; ++i) {
        FlowRecord r;
        for (double& v : r.values) v = u(rng);
        const FlowRecord once = project(r, b);
        REQUIRE(project(once, b) == once);
        for (Feature f : kBaseFeatures) {
            REQUIRE(once[f] >= b.lo[index_of(f)]);
            REQUIRE(once[f] <= b.hi[index_of(f)]);
        }
        const double dur = train.scaler->denormalize(Feature::duration, once[Feature::duration]);
        const double pkts = train.scaler->denormalize(Feature::tot_pkts, once[Feature::tot_pkts]);
        REQUIRE(dur >= 1e-6);
        REQUIRE(pkts > 0.0);
        const double pps = train.scaler->denormalize(Feature::pkts_per_sec, once[Feature::pkts_per_sec]);
        REQUIRE(pps == doctest::Approx(pkts / std::max(dur, 1e-6)).epsilon(1e-9));
    }
}

TEST_CASE("an always-benign surrogate is fooled at once by the first mask") {
    const FlowRecord x = flow(1.0, 10.0, 300.0, 100.0);
    const AttackResult r = craft_adversarial(x, constant_model(Label::benign), means(), {}, ProjectionBounds::raw_defaults());
    CHECK(r.success);
    CHECK(r.iterations_used == 1);
    CHECK(r.mask_used == 1u);
    CHECK(r.surrogate_label_after == Label::benign);
    CHECK(r.adversarial[Feature::duration] == doctest::Approx(1.0 + 0.01 * 9.0));
    for (Feature f : {Feature::tot_pkts, Feature::in_bytes, Feature::out_bytes}) CHECK(r.adversarial[f] == x[f]);
    CHECK(r.original == x);
}

TEST_CASE("an always-malicious surrogate exhausts the iteration budget") {
    const FlowRecord x = flow(1.0, 10.0, 300.0, 100.0);
    AttackConfig cfg;
    cfg.max_iterations = 7;
    const AttackResult r = craft_adversarial(x, constant_model(Label::malicious), means(), cfg, ProjectionBounds::raw_defaults());
    CHECK_FALSE(r.success);
    CHECK(r.iterations_used == 7);
    CHECK_FALSE(r.mask_used.has_value());
    CHECK(r.surrogate_label_after == Label::malicious);
}

TEST_CASE("scalar threshold surrogate is crossed at the predicted sweep") {
    // benign iff Duration < 0.5; x = 0.9, benign mean 0.1, magnitude 0.4, c = 0.25.
    // Steps are 0.1 t: 0.9 -> 0.8 -> 0.6 -> 0.3, so the third sweep succeeds.
    const ClassifierModel surrogate({Feature::duration},
                                    RandomForest({}, {DecisionTree::stump(0, std::nextafter(0.5, 0.0), Label::benign,
                                                                          Label::malicious)}));
    ClassMeans cm;
    cm.benign[0] = 0.1;
    cm.malicious[0] = 0.5;
    AttackConfig cfg;
    cfg.scaling_constant = 0.25;
    cfg.perturbable_features = {Feature::duration};
    ProjectionBounds b = ProjectionBounds::raw_defaults();
    const FlowRecord x = flow(0.9, 1.0, 1.0, 1.0);
    const AttackResult r = craft_adversarial(x, surrogate, cm, cfg, b);
    CHECK(r.success);
    CHECK(r.iterations_used == 3);
    CHECK(r.mask_used == 1u);
    CHECK(r.adversarial[Feature::duration] == doctest::Approx(0.3));
}

TEST_CASE("reset-per-mask starts every candidate from the original flow") {
    const FlowRecord x = flow(1.0, 10.0, 300.0, 100.0);
    AttackConfig cfg;
    cfg.max_iterations = 3;
    cfg.reset_per_mask = true;
    const AttackResult r = craft_adversarial(x, constant_model(Label::malicious), means(), cfg, ProjectionBounds::raw_defaults());
    const auto eps = perturbation_step(x, means(), cfg, 3);
    for (Feature f : kBaseFeatures) CHECK(r.adversarial[f] == doctest::Approx(x[f] + eps[index_of(f)]));

    cfg.reset_per_mask = false;
    const AttackResult c = craft_adversarial(x, constant_model(Label::malicious), means(), cfg, ProjectionBounds::raw_defaults());
    // Cumulative: each feature appears in 8 of the 15 masks per sweep, over sweeps 1..3.
    const double expected = x[Feature::duration] + 8.0 * 0.01 * 9.0 * (1 + 2 + 3);
    CHECK(c.adversarial[Feature::duration] == doctest::Approx(expected));
}

TEST_CASE("attack precondition errors") {
    const FlowRecord x = flow(1.0, 10.0, 300.0, 100.0);
    FlowRecord benign = x;
    benign.label = Label::benign;
    const auto bounds = ProjectionBounds::raw_defaults();
    CHECK_THROWS_AS(craft_adversarial(benign, constant_model(Label::benign), means(), {}, bounds), Error);

    const ClassifierModel derived_only = constant_model(Label::benign, {Feature::bytes_per_sec, Feature::pkts_per_sec});
    try {
        craft_adversarial(x, derived_only, means(), {}, bounds);
        FAIL("expected a mismatch");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("feature-space mismatch") != std::string::npos);
    }

    AttackConfig cfg;
    cfg.perturbable_features = {Feature::duration, Feature::bytes_per_sec};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.scaling_constant = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK(parse_mode("ratio") == MagnitudeMode::mean_ratio);
    CHECK(parse_mode("Mean-Difference") == MagnitudeMode::mean_difference);
    CHECK_THROWS_AS(parse_mode("gradient"), Error);
}

TEST_CASE("batch crafting attacks exactly the malicious rows") {
    const auto bounds = ProjectionBounds::raw_defaults();
    Dataset mal;
    for (int i = 0; i < 10; ++i) mal.rows.push_back(flow(1.0 + i, 10, 300, 100));
    const auto all = craft_batch(mal, constant_model(Label::benign), means(), {}, bounds);
    CHECK(all.size() == 10);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].success);
        CHECK(all[i].row_index == i);
    }

    Dataset benign;
    for (int i = 0; i < 5; ++i) benign.rows.push_back(flow(1.0, 10, 300, 100, Label::benign));
    CHECK(craft_batch(benign, constant_model(Label::benign), means(), {}, bounds).empty());

    Dataset mixed = benign;
    mixed.rows.insert(mixed.rows.begin() + 2, mal.rows.begin(), mal.rows.begin() + 3);
    const auto some = craft_batch(mixed, constant_model(Label::benign), means(), {}, bounds);
    REQUIRE(some.size() == 3);
    CHECK(some[0].row_index == 2);
    CHECK(some[2].row_index == 4);
}

TEST_CASE("successful attacks against a trained surrogate satisfy the attack invariants") {
    const Dataset train = training_set(11);
    const Dataset probe = training_set(12);
    MlpParams p;
    p.hidden_layers = {16, 16};
    p.epochs = 5;
    p.seed = 1;
    const ClassifierModel surrogate = train_mlp(train, kBase, p);
    const ClassMeans cm = class_means(train);
    const ProjectionBounds b = ProjectionBounds::from_training(train);
    AttackConfig cfg;
    cfg.max_iterations = 30;

    const auto first = craft_batch(probe, surrogate, cm, cfg, b);
    const auto second = craft_batch(probe, surrogate, cm, cfg, b);
    CHECK(first == second);
    std::size_t wins = 0;
    for (const AttackResult& r : first) {
        if (!r.success) continue;
        ++wins;
        REQUIRE(surrogate.predict(r.adversarial).label == Label::benign);
        REQUIRE(project(r.adversarial, b) == r.adversarial);
        REQUIRE(r.adversarial.label == Label::malicious);
    }
    CHECK(wins > 0);
}
