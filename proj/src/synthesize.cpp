#include <cmath>
#include <random>

#include "tfs/error.hpp"
#include "tfs/flow_data.hpp"

namespace tfs {

namespace {

void validate(const ClassProfile& p, std::string_view which) {
    if (p.count == 0) throw input_error("synthesize_flows: " + std::string(which) + " count must be positive");
    for (const LogNormalParams& ln : p.base) {
        if (!(std::isfinite(ln.mean) && ln.mean > 0.0) || !(std::isfinite(ln.sigma) && ln.sigma >= 0.0)) {
            throw input_error("synthesize_flows: " + std::string(which) +
                              " distribution needs mean > 0 and sigma >= 0");
        }
    }
}

}  // namespace

SynthSpec SynthSpec::desk_default() {
    SynthSpec s;
    // Long, chatty benign sessions against short, packet-dense attack flows.
    s.benign.count = 1900;
    s.benign.base = {{{10.0, 0.8}, {40.0, 0.7}, {20000.0, 0.9}, {4000.0, 0.9}}};
    s.malicious.count = 100;
    s.malicious.base = {{{0.5, 0.8}, {24.0, 0.7}, {1500.0, 0.9}, {900.0, 0.9}}};
    return s;
}

Dataset synthesize_flows(const SynthSpec& spec, std::uint64_t seed) {
    validate(spec.benign, "benign");
    validate(spec.malicious, "malicious");
    bool distinct = false;
    for (std::size_t i = 0; i < kBaseFeatureCount; ++i) {
        distinct = distinct || spec.benign.base[i].mean != spec.malicious.base[i].mean;
    }
    if (!distinct) throw input_error("synthesize_flows: benign and malicious means must differ");

    std::mt19937_64 rng(seed);
    Dataset out;
    out.rows.reserve(spec.benign.count + spec.malicious.count);
    auto emit = [&](const ClassProfile& p, Label label) {
        std::array<std::lognormal_distribution<double>, kBaseFeatureCount> dists;
        for (std::size_t i = 0; i < kBaseFeatureCount; ++i) {
            const double sigma = p.base[i].sigma;
            // lognormal(mu, sigma) has mean exp(mu + sigma^2 / 2).
            dists[i] = std::lognormal_distribution<double>(std::log(p.base[i].mean) - 0.5 * sigma * sigma, sigma);
        }
        for (std::size_t n = 0; n < p.count; ++n) {
            FlowRecord r;
            r.label = label;
            r.protocol = kProtocolTcp;
            for (std::size_t i = 0; i < kBaseFeatureCount; ++i) r.values[i] = dists[i](rng);
            derive_features(r);
            out.rows.push_back(r);
        }
    };
    emit(spec.benign, Label::benign);
    emit(spec.malicious, Label::malicious);
    return out;
}

}  // namespace tfs
