#pragma once

// Parametric s-concave families with exact convexity bookkeeping, and the
// one-dimensional functionals (moments, entropy, smoothing) built on them.

#include "convexmetrics/empirical.hpp"
#include "convexmetrics/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convexmetrics {

// --- convexity parameters -------------------------------------------------

// Borell's relation kappa = s / (1 - s n); requires s n < 1.
double kappa_from_s(double s, int n);
// Inverse relation s = kappa / (1 + kappa n); requires kappa n > -1.
double s_from_kappa(double kappa, int n);

// M_alpha^lambda(a, b) with alpha = -inf, 0, +inf special-cased.
double generalized_mean(double alpha, double lambda, double a, double b);

struct ConvexityParams {
    double s = 0.0;
    int n = 1;
    double kappa = 0.0;  // +inf when s n = 1 (uniform on a convex body)

    static ConvexityParams from_s(double s, int n);

    // s in (-1/2, 0): the range where the comparison theorems apply.
    bool in_theorem_range() const { return s > -0.5 && s < 0.0; }
};

// --- distribution specs ---------------------------------------------------

enum class Family { StdGaussian, Gaussian, CauchyType, ExponentialCentered, UniformInterval };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// Parameters exactly as supplied at construction (kept for serialization).
struct FamilyParams {
    int n = 1;
    std::vector<double> mean;        // gaussian
    std::vector<double> covariance;  // gaussian, row-major n x n
    double beta = 0.0;               // cauchy-type
    double scale = 1.0;              // cauchy-type
    double a = 0.0;                  // uniform-interval
    double b = 1.0;                  // uniform-interval
};

// x -> scale * x + shift; scale is row-major n x n.
struct AffineMap {
    std::vector<double> shift;
    std::vector<double> scale;

    static AffineMap identity(int n);
};

// Qualitative tail of a density along one direction; drives the analytic
// finiteness tests for moments and divergences.
enum class TailKind { Bounded, Gaussian, Exponential, Polynomial };

struct Tail {
    TailKind kind = TailKind::Bounded;
    // Gaussian: log f ~ -rate x^2; Exponential: log f ~ -rate |x|;
    // Polynomial: f ~ |x|^(-rate) (radial density exponent); Bounded: unused.
    double rate = 0.0;
};

struct Interval {
    double lo;
    double hi;
};

// A parametric s-concave measure: a base family pushed through an affine map.
class DistributionSpec {
public:
    static DistributionSpec std_gaussian(int n);
    static DistributionSpec gaussian(std::vector<double> mean, std::vector<double> covariance);
    static DistributionSpec cauchy_type(int n, double beta, double scale = 1.0);
    static DistributionSpec exponential_centered();
    static DistributionSpec uniform_interval(double a, double b);

    // Image under x -> A x + c, composed after any existing map.
    DistributionSpec with_affine(const AffineMap& outer) const;

    Family family() const { return family_; }
    int dim() const { return params_.n; }
    const FamilyParams& params() const { return params_; }
    const AffineMap& user_affine() const { return user_affine_; }
    const ConvexityParams& convexity() const { return conv_; }

    // Constant factor of the density in x coordinates (base constant / |det A|).
    double normalization() const;

    double log_density(std::span<const double> x) const;
    double density(std::span<const double> x) const;
    double log_density_1d(double x) const;
    double density_1d(double x) const;

    // Closure of the support (1D).
    Interval support_1d() const;
    // Finite support endpoints (1D), for quadrature breakpoints.
    std::vector<double> support_breakpoints_1d() const;
    // Location/scale hints for compactifying quadrature (1D).
    double center_1d() const;
    double spread_1d() const;

    double cdf_1d(double x) const;
    double quantile_1d(double u) const;
    // Quantile given u and its complement 1 - u (accurate in both tails).
    double quantile_1d(double u, double u_complement) const;

    // Exact moments when finite.
    bool has_finite_mean() const;
    bool has_finite_variance() const;
    Eigen::VectorXd mean() const;
    Eigen::MatrixXd covariance() const;

    // Tails: left/right in 1D; in nD the radial tail (same in every direction
    // for the polynomial families; for Gaussians the slowest direction).
    Tail left_tail_1d() const;
    Tail right_tail_1d() const;
    Tail radial_tail() const;

    // Effective map from the standardized base family to x coordinates.
    const Eigen::VectorXd& effective_shift() const { return shift_; }
    const Eigen::MatrixXd& effective_scale() const { return scale_; }

    // One draw into out (size dim()).
    void draw(Rng& rng, std::span<double> out) const;

    // Optional fixed seed carried by the serialized form ("seed_policy").
    std::optional<std::uint64_t> fixed_seed;

private:
    DistributionSpec(Family family, FamilyParams params, Eigen::VectorXd base_shift,
                     Eigen::MatrixXd base_scale, double s);

    double base_log_density(const Eigen::VectorXd& y) const;
    double base_log_density_1d(double y) const;
    double base_cdf(double y) const;
    double base_ccdf(double y) const;
    double base_quantile(double u, double uc) const;
    void refresh_map();

    Family family_;
    FamilyParams params_;
    AffineMap user_affine_;
    Eigen::VectorXd canonical_shift_;
    Eigen::MatrixXd canonical_scale_;
    Eigen::VectorXd shift_;
    Eigen::MatrixXd scale_;
    Eigen::MatrixXd inverse_scale_;
    double log_abs_det_ = 0.0;
    double base_log_norm_ = 0.0;
    ConvexityParams conv_;
};

// Affine image with mean 0 and identity covariance. 1D and sample_budget == 0
// use exact moments; otherwise the covariance is estimated from
// sample_budget draws. Throws PreconditionError when s <= -1/2.
DistributionSpec isotropize(const DistributionSpec& spec, std::size_t sample_budget = 0,
                            std::uint64_t seed = 0);

// m i.i.d. draws with uniform weights; deterministic given the seed. 1D uses
// the inverse CDF, nD Gaussians the standard-normal transform, nD Cauchy-type
// the Gaussian / chi scale mixture X = Z / sqrt(chi2_beta).
EmpiricalMeasure sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t m,
                        Execution exec = Execution::Parallel);

// One point per quantile stratum (i + U_i)/m (1D only). Much lower variance
// than i.i.d. sampling for plug-in estimators of smooth functionals.
EmpiricalMeasure sample_stratified_1d(const DistributionSpec& spec, std::uint64_t seed, std::size_t m);

// --- scalar functionals -----------------------------------------------------

struct ScalarEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for deterministic (quadrature / closed form) paths
    bool finite = true;
    bool monte_carlo = false;
};

enum class EstimationMethod { Auto, Quadrature, MonteCarlo };

// E|X|^p. Divergence is decided analytically (p >= -1/s for s < 0 tails).
ScalarEstimate abs_moment(const DistributionSpec& spec, double p, std::size_t budget = 200000,
                          std::uint64_t seed = 1);

// E exp(c |X|^2 / 2). Infinite for exponential or polynomial tails and for
// Gaussians with c >= 1 / lambda_max(covariance).
ScalarEstimate exp_quadratic_moment(const DistributionSpec& spec, double c);

// h(X) = E[-log f(X)] and Var(log f(X)).
ScalarEstimate differential_entropy(const DistributionSpec& spec, std::size_t budget = 200000,
                                    std::uint64_t seed = 1,
                                    EstimationMethod method = EstimationMethod::Auto);
ScalarEstimate varentropy(const DistributionSpec& spec, std::size_t budget = 200000,
                          std::uint64_t seed = 1, EstimationMethod method = EstimationMethod::Auto);

// max f over the support (1D), located by golden-section search on the log
// density from the mode bracket.
double max_density_1d(const DistributionSpec& spec);

// sup over a log-spaced |x| grid of f(x) (1 + |x|^(n - 1/s)); s < 0 only.
double borell_tail_constant(const DistributionSpec& spec, int grid_points = 200);

// --- smoothing ------------------------------------------------------------

// Huber function: r - lambda/2 for r > lambda, r^2 / (2 lambda) otherwise.
double huber(double r, double lambda);

// inf over |y - x| <= search_radius of F(y) + |x - y|^2 / (2 epsilon),
// by golden-section search (F convex).
double moreau_envelope_1d(const std::function<double(double)>& convex_fn, double epsilon, double x,
                          double search_radius);

// (f * phi_t)(x) for a 1D spec.
double gaussian_convolve_1d(const DistributionSpec& spec, double t, double x);

// || f - f * phi_t ||_L1 (1D).
double l1_distance_to_smoothed(const DistributionSpec& spec, double t);

// Total variation of f: integral of |f'| on the interior plus the jumps at
// finite support endpoints.
double grad_l1_norm_1d(const DistributionSpec& spec);

}  // namespace convexmetrics
