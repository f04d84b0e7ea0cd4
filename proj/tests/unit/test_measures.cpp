#include "convexmetrics/error.hpp"
#include "convexmetrics/measures.hpp"
#include "convexmetrics/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

using namespace convexmetrics;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt3 = std::sqrt(3.0);

std::vector<DistributionSpec> one_d_family() {
    return {
        DistributionSpec::std_gaussian(1),
        DistributionSpec::gaussian({0.7}, {2.5}),
        DistributionSpec::cauchy_type(1, 3.0),
        DistributionSpec::cauchy_type(1, 1.0),
        DistributionSpec::cauchy_type(1, 7.5, 2.0),
        DistributionSpec::exponential_centered(),
        DistributionSpec::exponential_centered().with_affine({{0.3}, {-1.5}}),
        DistributionSpec::uniform_interval(0.0, 1.0),
        DistributionSpec::uniform_interval(-kSqrt3, kSqrt3),
    };
}

std::vector<DistributionSpec> multi_d_family() {
    return {
        DistributionSpec::std_gaussian(2),
        DistributionSpec::gaussian({1.0, -1.0}, {2.0, 0.5, 0.5, 1.0}),
        DistributionSpec::cauchy_type(2, 4.0),
        DistributionSpec::cauchy_type(3, 2.5),
        DistributionSpec::cauchy_type(2, 6.0).with_affine({{0.5, 0.0}, {1.0, 0.3, 0.0, 2.0}}),
    };
}

double total_mass(const DistributionSpec& spec) {
    const Interval sup = spec.support_1d();
    const auto bp = spec.support_breakpoints_1d();
    return quad::integrate_line([&](double x) { return spec.density_1d(x); }, sup.lo, sup.hi, bp,
                                spec.center_1d(), spec.spread_1d(), 1e-12)
        .value;
}

}  // namespace

TEST_CASE("construction examples") {
    const auto c = DistributionSpec::cauchy_type(1, 3.0);
    // scipy/mpmath oracle: C = 0.6366197723675814 = 2/pi
    CHECK(c.density_1d(0.0) == doctest::Approx(0.6366197723675814).epsilon(1e-13));
    CHECK(c.convexity().s == doctest::Approx(-1.0 / 3.0));
    CHECK(c.convexity().kappa == doctest::Approx(-0.25));
    CHECK(c.covariance()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    const auto g2 = DistributionSpec::std_gaussian(2);
    CHECK(g2.normalization() == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
    CHECK(g2.convexity().s == 0.0);

    const auto e = DistributionSpec::exponential_centered();
    CHECK(e.mean()(0) == doctest::Approx(0.0));
    CHECK(e.covariance()(0, 0) == doctest::Approx(1.0));
    CHECK(e.density_1d(-1.0) == doctest::Approx(1.0));
    CHECK(e.density_1d(-1.5) == 0.0);
    CHECK(e.log_density_1d(-1.5) == -kInf);

    CHECK(DistributionSpec::uniform_interval(0, 1).convexity().s == 1.0);
    CHECK(DistributionSpec::exponential_centered().convexity().s == 0.0);

    CHECK_THROWS_AS(DistributionSpec::cauchy_type(1, -1.0), ParameterError);
    CHECK_THROWS_AS(DistributionSpec::gaussian({0.0, 0.0}, {1.0, 2.0, 2.0, 1.0}), ParameterError);
    CHECK_THROWS_AS(DistributionSpec::uniform_interval(1.0, 1.0), ParameterError);
}

TEST_CASE("density examples") {
    CHECK(DistributionSpec::std_gaussian(1).density_1d(0.0) == doctest::Approx(0.3989422804014327));
    CHECK(DistributionSpec::uniform_interval(-kSqrt3, kSqrt3).density_1d(2.0) == 0.0);
    const auto g = DistributionSpec::std_gaussian(3);
    const std::vector<double> x{0.1, -0.2, 0.3};
    CHECK(g.density(x) == doctest::Approx(std::exp(g.log_density(x))));
    CHECK_THROWS(g.density(std::vector<double>{0.0}));
}

TEST_CASE("1D densities integrate to one") {
    for (const auto& spec : one_d_family()) {
        CAPTURE(family_name(spec.family()));
        CHECK(std::abs(total_mass(spec) - 1.0) < 1e-6);
    }
}

TEST_CASE("nD densities integrate to one under importance sampling") {
    // E_g[f/g] with g a wide Gaussian-scale-mixture proposal = the spec itself
    // drawn with a broader beta; here simply check E_f[1/f * g] = 1 with g = N(0, 4I).
    for (const auto& spec : multi_d_family()) {
        const int n = spec.dim();
        const auto proposal = DistributionSpec::cauchy_type(n, 1.0);
        Rng rng(5);
        double sum = 0.0;
        double sq = 0.0;
        const int m = 200000;
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int k = 0; k < m; ++k) {
            proposal.draw(rng, x);
            const double w = std::exp(spec.log_density(x) - proposal.log_density(x));
            sum += w;
            sq += w * w;
        }
        const double mean = sum / m;
        const double se = std::sqrt((sq / m - mean * mean) / m);
        CAPTURE(family_name(spec.family()));
        CHECK(std::abs(mean - 1.0) <= 3.0 * se + 1e-3);
    }
}

TEST_CASE("densities are kappa-concave on random triples") {
    Rng rng(17);
    auto specs = one_d_family();
    for (const auto& s : multi_d_family()) specs.push_back(s);
    for (const auto& spec : specs) {
        const double kappa = spec.convexity().kappa;
        const auto n = static_cast<std::size_t>(spec.dim());
        std::vector<double> x(n);
        std::vector<double> y(n);
        std::vector<double> z(n);
        for (int k = 0; k < 200; ++k) {
            // Endpoints from the law itself (always in the support), spread
            // out by 3 so the tails are exercised too when the support allows.
            spec.draw(rng, x);
            spec.draw(rng, y);
            if (spec.family() != Family::UniformInterval && spec.family() != Family::ExponentialCentered) {
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] *= 3.0;
                    y[i] *= 3.0;
                }
            }
            const double lam = rng.uniform_open();
            for (std::size_t i = 0; i < n; ++i) z[i] = (1.0 - lam) * x[i] + lam * y[i];
            const double fx = spec.density(x);
            const double fy = spec.density(y);
            REQUIRE(fx > 0.0);
            REQUIRE(fy > 0.0);
            CAPTURE(family_name(spec.family()));
            CHECK(spec.density(z) >= generalized_mean(kappa, lam, fx, fy) * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("cauchy-type s is tight: a larger kappa fails somewhere") {
    // kappa = -1/(n + beta) is the largest exponent that works; a slightly
    // larger one is violated far in the tails.
    const auto spec = DistributionSpec::cauchy_type(1, 3.0);
    const double kappa = -1.0 / 4.0 + 0.02;
    const double x = 0.0;
    const double y = 1e4;
    const double lam = 0.5;
    const double fz = spec.density_1d(0.5 * (x + y));
    CHECK(fz < generalized_mean(kappa, lam, spec.density_1d(x), spec.density_1d(y)));
}

TEST_CASE("affine images keep s") {
    const auto c = DistributionSpec::cauchy_type(2, 5.0);
    const auto moved = c.with_affine({{1.0, 2.0}, {3.0, 1.0, 0.0, 0.5}});
    CHECK(moved.convexity().s == c.convexity().s);
    CHECK(moved.convexity().kappa == c.convexity().kappa);
}

TEST_CASE("isotropize") {
    const auto g = isotropize(DistributionSpec::std_gaussian(3));
    CHECK(g.effective_shift().norm() < 1e-14);
    CHECK((g.effective_scale() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);

    const auto c = isotropize(DistributionSpec::cauchy_type(1, 3.0));
    CHECK(std::abs(c.effective_scale()(0, 0) - 1.0) < 1e-3);

    const auto u = isotropize(DistributionSpec::uniform_interval(0.0, 1.0));
    CHECK(u.support_1d().lo == doctest::Approx(-kSqrt3));
    CHECK(u.support_1d().hi == doctest::Approx(kSqrt3));
    CHECK(u.covariance()(0, 0) == doctest::Approx(1.0));

    // Full whitening of a correlated Gaussian, re-estimated by sampling.
    const auto corr = isotropize(DistributionSpec::gaussian({1.0, 2.0}, {2.0, 0.9, 0.9, 1.0}));
    const auto cloud = sample(corr, 9, 200000);
    double m0 = 0.0;
    double m1 = 0.0;
    double v0 = 0.0;
    double v1 = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        m0 += cloud.point(i)[0];
        m1 += cloud.point(i)[1];
        v0 += cloud.point(i)[0] * cloud.point(i)[0];
        v1 += cloud.point(i)[1] * cloud.point(i)[1];
    }
    const double m = static_cast<double>(cloud.size());
    CHECK(std::abs(m0 / m) < 1e-2);
    CHECK(std::abs(m1 / m) < 1e-2);
    CHECK(std::abs(v0 / m - 1.0) < 1e-2);
    CHECK(std::abs(v1 / m - 1.0) < 1e-2);

    // nD Cauchy-type with a sample budget.
    const auto c2 = isotropize(DistributionSpec::cauchy_type(2, 8.0), 200000, 3);
    CHECK(std::abs(c2.covariance()(0, 0) - 1.0) < 0.05);
    CHECK(std::abs(c2.covariance()(1, 1) - 1.0) < 0.05);

    CHECK_THROWS_AS(isotropize(DistributionSpec::cauchy_type(1, 2.0)), PreconditionError);
    CHECK_THROWS_AS(isotropize(DistributionSpec::cauchy_type(1, 1.5)), PreconditionError);
}

TEST_CASE("sampling") {
    const auto g = sample(DistributionSpec::std_gaussian(1), 7, 10000);
    double mean = 0.0;
    for (double v : g.points()) mean += v;
    mean /= 10000.0;
    CHECK(std::abs(mean) < 4.0 / 100.0);

    const auto one = sample(DistributionSpec::uniform_interval(0, 1), 99, 1);
    CHECK(one.size() == 1);
    CHECK(one.point(0)[0] >= 0.0);
    CHECK(one.point(0)[0] <= 1.0);

    const auto c = sample(DistributionSpec::cauchy_type(1, 3.0), 21, 100000);
    double sq = 0.0;
    for (double v : c.points()) sq += v * v;
    CHECK(std::abs(sq / 100000.0 - 1.0) < 0.1);

    // Deterministic, and independent of the execution mode.
    const auto spec = DistributionSpec::cauchy_type(3, 4.0);
    const auto a = sample(spec, 5, 20000, Execution::Serial);
    const auto b = sample(spec, 5, 20000, Execution::Parallel);
    CHECK(a.points() == b.points());
    const auto d = sample(spec, 6, 20000);
    CHECK(a.points() != d.points());
}

TEST_CASE("stratified sampling covers every quantile stratum") {
    const auto spec = DistributionSpec::exponential_centered();
    const std::size_t m = 500;
    const auto cloud = sample_stratified_1d(spec, 4, m);
    REQUIRE(cloud.size() == m);
    for (std::size_t i = 0; i < m; ++i) {
        const double u = spec.cdf_1d(cloud.point(i)[0]);
        CHECK(u >= static_cast<double>(i) / m - 1e-12);
        CHECK(u <= static_cast<double>(i + 1) / m + 1e-12);
    }
}

TEST_CASE("cdf and quantile") {
    CHECK(DistributionSpec::std_gaussian(1).quantile_1d(0.5) == doctest::Approx(0.0));
    CHECK(DistributionSpec::cauchy_type(1, 3.0).cdf_1d(0.0) == doctest::Approx(0.5));
    const auto e = DistributionSpec::exponential_centered();
    CHECK(std::abs(e.quantile_1d(1.0 - std::exp(-1.0))) < 1e-14);
    CHECK(e.cdf_1d(0.0) == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK_THROWS_AS(e.quantile_1d(0.0), ParameterError);
    CHECK_THROWS_AS(e.quantile_1d(1.0), ParameterError);
    CHECK_THROWS_AS(e.quantile_1d(-0.1), ParameterError);
}

TEST_CASE("quantile(cdf(x)) roundtrip on the support interior") {
    for (const auto& spec : one_d_family()) {
        const Interval sup = spec.support_1d();
        for (int k = -40; k <= 40; ++k) {
            const double x = spec.center_1d() + 0.1 * k * spec.spread_1d();
            if (!(x > sup.lo && x < sup.hi)) continue;
            const double u = spec.cdf_1d(x);
            if (u <= 1e-12 || u >= 1.0 - 1e-12) continue;
            CAPTURE(family_name(spec.family()));
            CAPTURE(x);
            CHECK(std::abs(spec.quantile_1d(u) - x) <= 1e-8 * std::max(1.0, std::abs(x)));
        }
    }
}

TEST_CASE("cdf is nondecreasing") {
    for (const auto& spec : one_d_family()) {
        double prev = 0.0;
        for (int k = -200; k <= 200; ++k) {
            const double v = spec.cdf_1d(0.05 * k);
            CHECK(v >= prev);
            CHECK(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("absolute moments") {
    CHECK(abs_moment(DistributionSpec::std_gaussian(1), 2.0).value == doctest::Approx(1.0).epsilon(1e-9));
    const auto c4 = abs_moment(DistributionSpec::cauchy_type(1, 3.0), 4.0);
    CHECK_FALSE(c4.finite);
    CHECK(c4.value == kInf);
    CHECK_FALSE(abs_moment(DistributionSpec::cauchy_type(1, 3.0), 3.0).finite);
    CHECK(abs_moment(DistributionSpec::cauchy_type(1, 3.0), 2.0).value == doctest::Approx(1.0).epsilon(1e-8));
    // scipy oracle: sqrt(3)/2
    CHECK(abs_moment(DistributionSpec::uniform_interval(-kSqrt3, kSqrt3), 1.0).value ==
          doctest::Approx(0.8660254037844386).epsilon(1e-10));
    const auto nd = abs_moment(DistributionSpec::std_gaussian(3), 2.0, 200000, 4);
    CHECK(nd.monte_carlo);
    CHECK(std::abs(nd.value - 3.0) <= 3.0 * nd.std_error + 1e-12);
    CHECK_FALSE(abs_moment(DistributionSpec::cauchy_type(2, 3.0), 3.0).finite);
}

TEST_CASE("exponential quadratic moment") {
    // mpmath oracle: 1.8360342646044228
    const auto u = exp_quadratic_moment(DistributionSpec::uniform_interval(-kSqrt3, kSqrt3), 1.0);
    CHECK(u.finite);
    CHECK(u.value == doctest::Approx(1.8360342646044228).epsilon(1e-9));
    CHECK(u.value > 1.0);
    CHECK(u.value < std::exp(1.5));
    CHECK_FALSE(exp_quadratic_moment(DistributionSpec::std_gaussian(1), 1.0).finite);
    CHECK_FALSE(exp_quadratic_moment(DistributionSpec::cauchy_type(1, 3.0), 0.01).finite);
    CHECK_FALSE(exp_quadratic_moment(DistributionSpec::exponential_centered(), 0.01).finite);
    // Gaussian closed form 1/sqrt(1 - c) in 1D.
    CHECK(exp_quadratic_moment(DistributionSpec::std_gaussian(1), 0.5).value ==
          doctest::Approx(1.0 / std::sqrt(0.5)).epsilon(1e-9));
    CHECK(exp_quadratic_moment(DistributionSpec::std_gaussian(2), 0.5).value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("entropy and varentropy") {
    const auto g = DistributionSpec::std_gaussian(1);
    CHECK(differential_entropy(g).value == doctest::Approx(1.4189385332046727).epsilon(1e-9));
    CHECK(varentropy(g).value == doctest::Approx(0.5).epsilon(1e-9));
    const auto u = DistributionSpec::uniform_interval(-kSqrt3, kSqrt3);
    CHECK(differential_entropy(u).value == doctest::Approx(1.2424533248940002).epsilon(1e-10));
    CHECK(std::abs(varentropy(u).value) < 1e-12);
    CHECK(differential_entropy(DistributionSpec::exponential_centered()).value == doctest::Approx(1.0).epsilon(1e-9));
    // scipy oracle: h = 1.2241714275282414, Var = 1.1594725347882593
    const auto c = DistributionSpec::cauchy_type(1, 3.0);
    CHECK(differential_entropy(c).value == doctest::Approx(1.2241714275282414).epsilon(1e-8));
    CHECK(varentropy(c).value == doctest::Approx(1.1594725347882593).epsilon(1e-7));

    const auto mc = differential_entropy(g, 200000, 3, EstimationMethod::MonteCarlo);
    CHECK(mc.monte_carlo);
    CHECK(std::abs(mc.value - 1.4189385332046727) <= 3.0 * mc.std_error);
    const auto g2 = DistributionSpec::std_gaussian(2);
    const auto v2 = varentropy(g2, 200000, 8);
    CHECK(std::abs(v2.value - 1.0) <= 3.0 * v2.std_error + 1e-3);
}

TEST_CASE("entropy and varentropy bounds hold for isotropic members") {
    for (const auto& raw : one_d_family()) {
        if (!raw.has_finite_variance()) continue;
        const auto spec = isotropize(raw);
        const auto h = differential_entropy(spec);
        CHECK(h.value <= 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) + 3.0 * h.std_error + 1e-9);
        const double kappa = spec.convexity().kappa;
        if (std::isinf(kappa)) continue;
        const auto v = varentropy(spec);
        CHECK(v.value <= 1.0 / ((1.0 + kappa) * (1.0 + kappa)) + 3.0 * v.std_error + 1e-9);
    }
}

TEST_CASE("max density") {
    CHECK(max_density_1d(DistributionSpec::cauchy_type(1, 3.0)) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-10));
    CHECK(max_density_1d(DistributionSpec::exponential_centered()) == doctest::Approx(1.0));
    CHECK(max_density_1d(DistributionSpec::gaussian({3.0}, {0.25})) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * 0.25)).epsilon(1e-10));
    CHECK(max_density_1d(DistributionSpec::uniform_interval(0.0, 4.0)) == doctest::Approx(0.25));
}

TEST_CASE("Borell tail constant is finite for s < 0") {
    for (double beta : {1.0, 3.0, 10.0}) {
        const double c = borell_tail_constant(DistributionSpec::cauchy_type(1, beta));
        CHECK(std::isfinite(c));
        CHECK(c > 0.0);
    }
    const double c2 = borell_tail_constant(DistributionSpec::cauchy_type(2, 3.0));
    CHECK(std::isfinite(c2));
    CHECK_THROWS_AS(borell_tail_constant(DistributionSpec::std_gaussian(1)), ParameterError);
}

TEST_CASE("Huber and Moreau envelope") {
    CHECK(huber(3.0, 1.0) == doctest::Approx(2.5));
    CHECK(huber(0.5, 1.0) == doctest::Approx(0.125));
    const auto abs_fn = [](double y) { return std::abs(y); };
    CHECK(moreau_envelope_1d(abs_fn, 1.0, 3.0, 10.0) == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(moreau_envelope_1d(abs_fn, 1.0, 0.5, 10.0) == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(std::abs(moreau_envelope_1d(abs_fn, 1e-6, 0.7, 10.0) - 0.7) < 1e-4);
    // Below F and nondecreasing as epsilon shrinks.
    const auto f = [](double y) { return std::exp(y) + y * y; };
    double prev = -kInf;
    for (double eps : {4.0, 1.0, 0.25, 0.05}) {
        const double v = moreau_envelope_1d(f, eps, 0.3, 5.0);
        CHECK(v <= f(0.3) + 1e-12);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK_THROWS_AS(moreau_envelope_1d(abs_fn, 1.0, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(moreau_envelope_1d(abs_fn, 0.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("Gaussian convolution") {
    CHECK(gaussian_convolve_1d(DistributionSpec::std_gaussian(1), 1.0, 0.0) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-9));
    // P(|Z| <= 1): the uniform(0,1) window seen from x = 0.5 at t = 0.5.
    CHECK(gaussian_convolve_1d(DistributionSpec::uniform_interval(0, 1), 0.5, 0.5) ==
          doctest::Approx(0.6826894921370859).epsilon(1e-9));
    const auto c = DistributionSpec::cauchy_type(1, 3.0);
    CHECK(std::abs(gaussian_convolve_1d(c, 1e-4, 0.3) - c.density_1d(0.3)) < 1e-3);
    // Total mass of the smoothed density.
    const auto e = DistributionSpec::exponential_centered();
    const double mass = quad::integrate_line([&](double x) { return gaussian_convolve_1d(e, 0.3, x); }, -kInf, kInf,
                                             std::vector<double>{-1.0}, 0.0, 1.0, 1e-9)
                            .value;
    CHECK(std::abs(mass - 1.0) < 1e-6);
}

TEST_CASE("smoothing L1 gap and total variation of the density") {
    const auto g = DistributionSpec::std_gaussian(1);
    // scipy oracle: ||phi - phi_{sqrt(1+t^2)}||_1
    CHECK(l1_distance_to_smoothed(g, 0.05) == doctest::Approx(0.0012083436644355601).epsilon(1e-5));
    CHECK(l1_distance_to_smoothed(g, 0.1) == doctest::Approx(0.004815367598890831).epsilon(1e-5));
    CHECK(l1_distance_to_smoothed(g, 0.2) == doctest::Approx(0.01897992050877324).epsilon(1e-5));
    CHECK(l1_distance_to_smoothed(g, 1e-5) < 1e-6);

    CHECK(grad_l1_norm_1d(DistributionSpec::exponential_centered()) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(grad_l1_norm_1d(g) == doctest::Approx(2.0 * 0.3989422804014327).epsilon(1e-4));
    CHECK(grad_l1_norm_1d(DistributionSpec::uniform_interval(0, 2)) == doctest::Approx(1.0).epsilon(1e-6));
    const auto c = DistributionSpec::cauchy_type(1, 3.0);
    CHECK(grad_l1_norm_1d(c) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-4));
    CHECK(l1_distance_to_smoothed(g, 0.1) <= 0.2 * grad_l1_norm_1d(g));
}
