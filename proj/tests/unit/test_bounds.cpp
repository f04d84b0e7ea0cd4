#include "convexmetrics/bounds.hpp"
#include "convexmetrics/error.hpp"
#include "convexmetrics/measures.hpp"
#include "convexmetrics/random.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace convexmetrics;

namespace {

// Golden-section search on log t over [M, M * 1e8].
double golden_min(double A, double B, double m, double p, double M) {
    const auto F = [&](double lt) { return A * std::exp(m * lt) + B * std::exp(-p * lt); };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(M);
    double b = a + std::log(1e8);
    for (int i = 0; i < 300; ++i) {
        const double c = b - gr * (b - a);
        const double d = a + gr * (b - a);
        if (F(c) < F(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return F(0.5 * (a + b));
}

}  // namespace

TEST_CASE("minimization lemma") {
    CHECK(minimize_lemma(1, 1, 1, 1, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(minimize_lemma(1, 1, 1, 1, 2) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(minimize_lemma(2, 2, 1, 1, 1e-9) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(minimize_lemma(0, 1, 1, 1, 1), ParameterError);
    CHECK_THROWS_AS(minimize_lemma(1, 1, 1, 1, 0), ParameterError);
}

TEST_CASE("minimization lemma matches a numeric minimizer") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double A = std::exp(4.0 * rng.normal() / 2.0);
        const double B = std::exp(4.0 * rng.normal() / 2.0);
        const double m = 0.1 + 3.0 * rng.uniform_open();
        const double p = 0.1 + 3.0 * rng.uniform_open();
        const double M = std::exp(2.0 * rng.normal());
        const double closed = minimize_lemma(A, B, m, p, M);
        const double numeric = golden_min(A, B, m, p, M);
        CHECK(closed <= numeric * (1.0 + 1e-9));
        CHECK(closed == doctest::Approx(numeric).epsilon(1e-7));
    }
}

TEST_CASE("constants") {
    CHECK(const_d0(1, -0.25) == doctest::Approx(6.103515625).epsilon(1e-14));
    CHECK(const_d0(2, -0.1) == doctest::Approx(2.9990243644497707).epsilon(1e-14));
    CHECK(const_C(2, -0.4) == doctest::Approx(3.535533905932738).epsilon(1e-14));
    CHECK(const_C(2, -0.2) == 2.0);
    CHECK(const_c2(-1e-6) == doctest::Approx(0.183939260731276).epsilon(1e-9));
    CHECK(large_dev_lower(1, -0.25) == doctest::Approx(0.841796875).epsilon(1e-14));
    CHECK(const_c0(1, -0.25) == doctest::Approx(3.1712119389339926e-08).epsilon(1e-12));
    CHECK(const_c0(2, -0.1) == doctest::Approx(1.226700477986069e-07).epsilon(1e-12));
    CHECK(const_c0(3, -0.05) == doctest::Approx(3.2896347508996195e-07).epsilon(1e-12));
    CHECK_THROWS_AS(const_d0(1, -0.5), ParameterError);
    CHECK_THROWS_AS(const_d0(1, 0.0), ParameterError);
    CHECK_THROWS_AS(const_C(2, -0.5), ParameterError);
}

TEST_CASE("moment constant jumps at -1/(p+1)") {
    for (double p : {1.5, 2.0, 4.0}) {
        const double edge = -1.0 / (p + 1.0);
        CHECK(const_C(p, edge + 1e-9) == p);
        CHECK(const_C(p, edge) > 0.0);
        CHECK(std::isfinite(const_C(p, edge - 1e-3)));
    }
}

TEST_CASE("exact c1 solves its root equation") {
    for (int n : {1, 2, 3}) {
        for (double s : {-0.05, -0.25}) {
            const auto r = const_c1_exact(n, s);
            const double kappa = kappa_from_s(s, n);
            double sum = 0.0;
            for (int i = 1; i <= n; ++i) sum += 1.0 / (1.0 + i * kappa - r.alpha);
            CHECK(sum == doctest::Approx(-n * std::log(const_c0(n, s))).epsilon(1e-9));
            CHECK(r.c1 > 0.0);
            CHECK(r.c1 < 1.0);
        }
    }
}

TEST_CASE("Grunbaum lower bound is increasing and continuous at 0") {
    double prev = 0.0;
    for (double s = -0.99; s < 0.0; s += 0.01) {
        const double g = grunbaum_lower(s);
        CHECK(g > prev);
        prev = g;
    }
    CHECK(grunbaum_lower(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(grunbaum_lower(-1e-9) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
    CHECK(grunbaum_lower(-0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(grunbaum_lower(-1.0), ParameterError);
}

TEST_CASE("varentropy bound") {
    CHECK(varentropy_bound(3, 0.0) == doctest::Approx(3.0));
    CHECK(varentropy_bound(2, std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(varentropy_bound(1, -0.2) == doctest::Approx(1.0 / 0.64));
    CHECK_THROWS_AS(varentropy_bound(2, -0.5), ParameterError);
}

TEST_CASE("frozen theorem values") {
    // scipy oracle, all constants 1 and alpha 2
    CHECK(thm_tv_from_bl(0.01, 1, -0.1).value == doctest::Approx(0.13788560018797313).epsilon(1e-12));
    CHECK(thm_w1_from_bl(0.1, 4, -0.25).value == doctest::Approx(0.894427190999916).epsilon(1e-12));
    CHECK(thm_wq_from_wp(1, 1, 2, 1, -0.1).value == doctest::Approx(3.381894049102725).epsilon(1e-12));
    CHECK(thm_kl_from_tv(0.1, 2, -0.05).value == doctest::Approx(40.61498591126976).epsilon(1e-12));
    CHECK(thm_tsallis_from_tv(0.5, 1, -0.25, 2, 2).value == doctest::Approx(38.22649956519359).epsilon(1e-12));
    CHECK(smoothing_l1_bound(1, 1, -0.25).value == doctest::Approx(6.103515625).epsilon(1e-12));
    CHECK(max_density_bound(2, -0.1).value == doctest::Approx(17.988294277126702).epsilon(1e-12));
    CHECK(max_density_bound(1, -0.25).value == doctest::Approx(2.0));
}

TEST_CASE("theorem bounds vanish at zero and increase in the distance") {
    for (double s : {-0.05, -0.1, -0.2}) {
        CHECK(thm_tv_from_bl(0, 2, s).value == 0.0);
        CHECK(thm_w1_from_bl(0, 2, s).value == 0.0);
        CHECK(thm_wq_from_wp(0, 1, 1.5, 2, s).value == 0.0);
        CHECK(thm_kl_from_tv(0, 2, s).value == 0.0);
        CHECK(thm_tsallis_from_tv(0, 2, s, 1.5, 3.0).value == 0.0);
        double prev[5] = {0, 0, 0, 0, 0};
        for (double d = 0.01; d <= 1.0; d += 0.07) {
            const double v[5] = {thm_tv_from_bl(d, 2, s).value, thm_w1_from_bl(d, 2, s).value,
                                 thm_wq_from_wp(d, 1, 1.5, 2, s).value, thm_kl_from_tv(d, 2, s).value,
                                 thm_tsallis_from_tv(d, 2, s, 1.5, 3.0).value};
            for (int k = 0; k < 5; ++k) {
                CHECK(v[k] > prev[k]);
                prev[k] = v[k];
            }
        }
    }
}

TEST_CASE("bounds scale with their named constant") {
    BoundConfig cfg;
    cfg.set_constant("c_tvbl", 1.7);
    const auto base = thm_tv_from_bl(0.3, 2, -0.1);
    const auto scaled = thm_tv_from_bl(0.3, 2, -0.1, cfg);
    CHECK(scaled.constant_name == "c_tvbl");
    CHECK(scaled.value == doctest::Approx(base.value * std::pow(1.7, scaled.constant_power)).epsilon(1e-12));
    CHECK_THROWS_AS(cfg.set_constant("c_unknown", 1.0), ParameterError);
    CHECK_THROWS_AS(cfg.set_constant("c_kl", -1.0), ParameterError);
    BoundConfig bad;
    bad.alpha = 2.5;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("validity domains") {
    const auto tv = thm_tv_from_bl(0.1, 1, -0.6);
    CHECK_FALSE(tv.in_validity_domain);
    CHECK_FALSE(tv.violated_precondition.empty());
    CHECK(std::isnan(tv.value));
    // alpha q |s| < 1 is required
    CHECK_FALSE(thm_wq_from_wp(0.5, 1, 3, 1, -0.2).in_validity_domain);
    CHECK(thm_wq_from_wp(0.5, 1, 2, 1, -0.2).in_validity_domain);
    CHECK_FALSE(thm_kl_from_tv(0.1, 1, -0.3).in_validity_domain);
    CHECK(thm_tsallis_from_tv(0.1, 1, -0.2, 2.0, std::numeric_limits<double>::infinity()).value ==
          std::numeric_limits<double>::infinity());
    const auto md = max_density_bound(1, -0.7);
    CHECK_FALSE(md.in_validity_domain);
    CHECK(md.value == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(thm_tv_from_bl(-0.1, 1, -0.1), ParameterError);
    CHECK_THROWS_AS(thm_wq_from_wp(1, 2, 2, 1, -0.1), ParameterError);
}

TEST_CASE("blow-up as s approaches the domain edge") {
    CHECK(thm_tv_from_bl(0.1, 1, -0.4999).value > thm_tv_from_bl(0.1, 1, -0.3).value);
    CHECK(max_density_bound(1, -0.49999).value > 1e4);
    CHECK(thm_kl_from_tv(0.1, 1, -0.2499).value > thm_kl_from_tv(0.1, 1, -0.1).value);
}

TEST_CASE("tail deviation bound") {
    const auto r = tail_bound_deviation(10.0, 1, -0.25);
    CHECK(r.value == doctest::Approx(std::pow(4.0 / 10.0, 2.0)));
    CHECK_FALSE(r.vacuous);
    CHECK(tail_bound_deviation(0.5, 1, -0.25).vacuous);
    // exponential branch needs 6 c sqrt(n) <= u <= 3c/|s| and s >= -1/(2 sqrt n)
    const auto e = tail_bound_deviation(10.0, 1, -0.05);
    REQUIRE(e.secondary_value.has_value());
    CHECK(*e.secondary_value == doctest::Approx(std::exp(-10.0)));
    CHECK_FALSE(tail_bound_deviation(100.0, 1, -0.05).secondary_value.has_value());
}

TEST_CASE("known inequality slacks") {
    CHECK(pinsker_gilardoni_slack(1.0, 0.5, 1.0) == doctest::Approx(0.0));
    CHECK(talagrand_slack(1.0, 0.5) == doctest::Approx(0.0));
    CHECK(bl_cap_slack(0.3, 0.5, 0.4) == doctest::Approx(0.1));
    CHECK(renyi_interval_coeff(0.5, 0.75) == doctest::Approx(1.0 / 3.0));
    CHECK(renyi_interval_strong_coeff(0.5, 0.75) == doctest::Approx(0.5));
    const auto sl = renyi_interval_slack(0.2, 0.4, 0.5, 0.75);
    CHECK(sl.lower == doctest::Approx(0.2 - 0.4 / 3.0));
    CHECK(sl.lower_strong == doctest::Approx(0.0));
    CHECK(sl.upper == doctest::Approx(0.2));
    CHECK_THROWS_AS(renyi_interval_coeff(0.5, 1.0), ParameterError);
    CHECK_THROWS_AS(pinsker_gilardoni_slack(0.1, 0.1, 1.5), ParameterError);
}

TEST_CASE("the interval coefficient lies in (0, 1)") {
    for (double p = 0.05; p < 0.95; p += 0.05) {
        for (double q = p + 0.025; q < 1.0; q += 0.05) {
            const double k = renyi_interval_coeff(p, q);
            CHECK(k > 0.0);
            CHECK(k < 1.0);
        }
    }
}
