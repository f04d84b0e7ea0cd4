#pragma once

// Distances and divergences between parametric specs (quadrature in 1D,
// Monte Carlo in nD) and between point clouds (LP / optimal transport).
// Total variation uses the L1 convention: d_TV = integral of |f - g|, in [0, 2].

#include "convexmetrics/empirical.hpp"
#include "convexmetrics/measures.hpp"
#include "convexmetrics/transport.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace convexmetrics {

struct DistanceEstimate {
    std::string name;                 // "tv", "bl", "wasserstein", "renyi", "kl", "tsallis"
    std::optional<double> p;          // order, when the quantity has one
    double value = 0.0;               // +inf when finite == false
    std::optional<double> std_error;  // present for sampled estimates only
    std::string method;               // "quadrature", "monte-carlo", "lp", "exact-ot", ...
    bool finite = true;               // false only when infiniteness is analytic
};

// --- total variation and bounded Lipschitz ---------------------------------

DistanceEstimate tv_distance(const DistributionSpec& mu, const DistributionSpec& nu,
                             std::size_t budget = 200000, std::uint64_t seed = 1);

// L1 distance of the weight vectors on the union of both supports.
DistanceEstimate tv_distance_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Exact d_BL of two discrete measures. Solved as optimal transport with the
// truncated cost min(|x - y|, 2), which is the LP dual of maximizing
// sum (a_i - b_i) g_i over |g_i| <= 1, |g_i - g_j| <= |x_i - x_j|.
DistanceEstimate bl_distance_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// d_BL between specs from m-point samples (stratified in 1D). std_error is
// the two-sample noise floor: the mean d_BL between independent samples of
// the same spec.
DistanceEstimate bl_distance(const DistributionSpec& mu, const DistributionSpec& nu, std::size_t m = 300,
                             std::uint64_t seed = 1);

// --- Wasserstein -------------------------------------------------------------

// (integral over (0,1) of |F^-1(u) - G^-1(u)|^p du)^(1/p), 1D only.
DistanceEstimate wasserstein_1d(const DistributionSpec& mu, const DistributionSpec& nu, double p);

enum class OtSolver { Exact, Sinkhorn };

DistanceEstimate wasserstein_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                                       OtSolver solver = OtSolver::Exact,
                                       const SinkhornOptions& sinkhorn = {});

// --- Renyi, Kullback-Leibler, Tsallis ---------------------------------------

// Analytic finiteness of D_p(mu || nu) from supports and tail classes.
bool renyi_is_finite(const DistributionSpec& mu, const DistributionSpec& nu, double p);

// D_p = log(integral f^p g^(1-p)) / (p - 1); p = 1 gives KL = integral f log(f/g).
DistanceEstimate renyi_divergence(const DistributionSpec& mu, const DistributionSpec& nu, double p,
                                  std::size_t budget = 200000, std::uint64_t seed = 1);

DistanceEstimate kl_divergence(const DistributionSpec& mu, const DistributionSpec& nu,
                               std::size_t budget = 200000, std::uint64_t seed = 1);

// T_p = (exp((p - 1) D_p) - 1) / (p - 1).
double tsallis_from_renyi(double renyi, double p);

DistanceEstimate tsallis_divergence(const DistributionSpec& mu, const DistributionSpec& nu, double p,
                                    std::size_t budget = 200000, std::uint64_t seed = 1);

}  // namespace convexmetrics
