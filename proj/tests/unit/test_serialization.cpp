#include "convexmetrics/error.hpp"
#include "convexmetrics/serialization.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace convexmetrics;
using nlohmann::json;

namespace {

void check_same_density(const DistributionSpec& a, const DistributionSpec& b) {
    REQUIRE(a.dim() == b.dim());
    const std::vector<std::vector<double>> probes = {{0.1, -0.3}, {1.2, 0.4}, {-2.0, 0.7}};
    for (const auto& x : probes) {
        const std::span<const double> pt(x.data(), static_cast<std::size_t>(a.dim()));
        const double la = a.log_density(pt);
        const double lb = b.log_density(pt);
        if (std::isinf(la)) {
            CHECK(la == lb);
        } else {
            CHECK(la == doctest::Approx(lb).epsilon(1e-14));
        }
    }
}

}  // namespace

TEST_CASE("spec JSON roundtrip") {
    const std::vector<DistributionSpec> specs = {
        DistributionSpec::std_gaussian(2),
        DistributionSpec::gaussian({0.5, -1.0}, {2.0, 0.3, 0.3, 1.0}),
        DistributionSpec::cauchy_type(2, 5.0, 1.5),
        DistributionSpec::exponential_centered().with_affine({{0.2}, {-1.0}}),
        DistributionSpec::uniform_interval(-1.0, 3.0),
        DistributionSpec::cauchy_type(1, 3.0).with_affine({{1.0}, {2.0}}),
    };
    for (const auto& spec : specs) {
        const json doc = spec_to_json(spec);
        CHECK(doc.at("seed_policy") == "derived");
        const auto back = spec_from_json(doc);
        CHECK(back.family() == spec.family());
        CHECK(back.convexity().s == spec.convexity().s);
        check_same_density(spec, back);
        CHECK(spec_to_json(back) == doc);
        CHECK(spec_from_json(json::parse(doc.dump())).params().n == spec.params().n);
    }
}

TEST_CASE("seed policy survives a roundtrip") {
    auto spec = DistributionSpec::std_gaussian(1);
    spec.fixed_seed = 42;
    const json doc = spec_to_json(spec);
    CHECK(doc.at("seed_policy") == 42);
    CHECK(spec_from_json(doc).fixed_seed == std::optional<std::uint64_t>(42));
}

TEST_CASE("malformed specs are config errors") {
    CHECK_THROWS_AS(spec_from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "laplace"}}), ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "gaussian"}}), ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "cauchy-type"}, {"params", {{"n", 1}}}}), ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "cauchy-type"}, {"params", {{"n", 1}, {"beta", -2}}}}),
                    ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "uniform-interval"}, {"params", {{"a", 2}, {"b", 1}}}}),
                    ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "gaussian"},
                                        {"params", {{"mean", {0, 0}}, {"covariance", {{1, 2}, {2, 1}}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "std-gaussian"},
                                        {"params", {{"n", 1}}},
                                        {"affine", {{"shift", {0}}, {"scale", {{0}}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(spec_from_json(json{{"family", "std-gaussian"}, {"seed_policy", "random"}}), ConfigError);
}

TEST_CASE("estimate JSON uses null for infinities") {
    DistanceEstimate e;
    e.name = "renyi";
    e.p = 2.0;
    e.value = std::numeric_limits<double>::infinity();
    e.finite = false;
    e.method = "analytic";
    const json j = estimate_to_json(e);
    CHECK(j.at("value").is_null());
    CHECK(j.at("finite") == false);
    CHECK(j.at("std_error").is_null());
    CHECK(j.at("p") == 2.0);
    CHECK(number_or_null(std::nan("")).is_null());
    CHECK(number_or_null(1.5) == 1.5);
}

TEST_CASE("bound result and bound config JSON") {
    const auto r = thm_tv_from_bl(0.1, 1, -0.7);
    const json j = bound_result_to_json(r);
    CHECK(j.at("formula_id") == "thm-tv-bl");
    CHECK(j.at("in_validity_domain") == false);
    CHECK(j.contains("violated_precondition"));
    CHECK(j.at("value").is_null());

    BoundConfig cfg;
    cfg.alpha = 1.5;
    cfg.set_constant("c_kl", 0.25);
    const auto back = bound_config_from_json(bound_config_to_json(cfg));
    CHECK(back.alpha == 1.5);
    CHECK(back.constant("c_kl") == 0.25);
    CHECK(back.constant("c_tvbl") == 1.0);
    CHECK_THROWS_AS(bound_config_from_json(json{{"alpha", 3.0}}), ConfigError);
    CHECK_THROWS_AS(bound_config_from_json(json{{"constants", {{"c_nope", 1.0}}}}), ConfigError);
}
