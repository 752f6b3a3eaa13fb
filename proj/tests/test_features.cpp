#include <doctest.h>

#include "tfs/error.hpp"
#include "tfs/features.hpp"

using namespace tfs;

TEST_CASE("feature names round-trip through parsing") {
    for (Feature f : kAllFeatures) {
        REQUIRE(parse_feature(feature_name(f)) == f);
    }
    CHECK(parse_feature("tot_pkts") == Feature::tot_pkts);
    CHECK(parse_feature("Tot Pkts") == Feature::tot_pkts);
    CHECK(parse_feature("ratio-out-in") == Feature::ratio_out_in);
    CHECK_FALSE(parse_feature("Protocol").has_value());
}

TEST_CASE("only the first four features are base features") {
    CHECK(is_base(Feature::duration));
    CHECK(is_base(Feature::out_bytes));
    CHECK_FALSE(is_base(Feature::bytes_per_sec));
    CHECK_FALSE(is_base(Feature::ratio_out_in));
}

TEST_CASE("feature lists come back in canonical order") {
    const auto v = parse_feature_list("OutBytes, Duration,PktsPerSec");
    REQUIRE(v.size() == 3);
    CHECK(v[0] == Feature::duration);
    CHECK(v[1] == Feature::out_bytes);
    CHECK(v[2] == Feature::pkts_per_sec);
}

TEST_CASE("feature list errors") {
    CHECK_THROWS_AS(parse_feature_list("Duration,Bogus"), Error);
    CHECK_THROWS_AS(parse_feature_list("Duration,duration"), Error);
    CHECK_THROWS_AS(parse_feature_list(" , "), Error);
}

TEST_CASE("feature sets compare canonical names") {
    FeatureSet s{"TotPkts", "in_bytes"};
    CHECK(s.contains("totpkts"));
    CHECK(s.contains("InBytes"));
    CHECK_FALSE(s.insert("Tot Pkts"));
    CHECK(s.size() == 2);
    CHECK(s == FeatureSet(std::vector<Feature>{Feature::in_bytes, Feature::tot_pkts}));
    CHECK_THROWS_AS(s.insert("--"), Error);
}
