#include "convexmetrics/distances.hpp"

#include "convexmetrics/error.hpp"
#include "convexmetrics/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace convexmetrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DistanceEstimate infinite_estimate(std::string name, std::optional<double> p) {
    DistanceEstimate e;
    e.name = std::move(name);
    e.p = p;
    e.value = kInf;
    e.finite = false;
    e.method = "analytic";
    return e;
}

bool same_law(const DistributionSpec& mu, const DistributionSpec& nu) {
    if (mu.family() != nu.family() || mu.dim() != nu.dim()) return false;
    if (mu.family() == Family::CauchyType && mu.params().beta != nu.params().beta) return false;
    return mu.effective_shift() == nu.effective_shift() && mu.effective_scale() == nu.effective_scale();
}

void require_same_dim(const DistributionSpec& mu, const DistributionSpec& nu) {
    if (mu.dim() != nu.dim()) throw ParameterError("nu", "specs must share a dimension");
}

std::vector<double> joint_breakpoints(const DistributionSpec& mu, const DistributionSpec& nu) {
    std::vector<double> out = mu.support_breakpoints_1d();
    for (double b : nu.support_breakpoints_1d()) out.push_back(b);
    out.push_back(mu.center_1d());
    out.push_back(nu.center_1d());
    return out;
}

int strength(TailKind k) {
    switch (k) {
        case TailKind::Polynomial: return 0;
        case TailKind::Exponential: return 1;
        case TailKind::Gaussian: return 2;
        case TailKind::Bounded: return 3;
    }
    return 0;
}

// Integrability of f^p g^(1-p) (p > 1) or f |log g| (p = 1) along one tail.
// radial_dim is 1 for a 1D side and n for a radial tail in R^n (where a
// polynomial tail rate is the density exponent).
bool tail_side_finite(const Tail& tf, const Tail& tg, double p, int radial_dim) {
    if (tf.kind == TailKind::Bounded) return true;
    if (tg.kind == TailKind::Bounded) return false;
    if (p == 1.0) {
        if (tf.kind != TailKind::Polynomial) return true;
        switch (tg.kind) {
            case TailKind::Polynomial: return true;
            case TailKind::Exponential: return tf.rate > radial_dim + 1.0;
            case TailKind::Gaussian: return tf.rate > radial_dim + 2.0;
            default: return false;
        }
    }
    const int sf = strength(tf.kind);
    const int sg = strength(tg.kind);
    if (sf != sg) return sf > sg;
    const double combined = p * tf.rate - (p - 1.0) * tg.rate;
    if (tf.kind == TailKind::Polynomial) return combined > radial_dim;
    return combined > 0.0;
}

DistanceEstimate quadrature_tv(const DistributionSpec& mu, const DistributionSpec& nu) {
    const Interval a = mu.support_1d();
    const Interval b = nu.support_1d();
    const double c = 0.5 * (mu.center_1d() + nu.center_1d());
    const double scale = std::max({mu.spread_1d(), nu.spread_1d(), 0.5 * std::abs(mu.center_1d() - nu.center_1d())});
    const auto g = [&](double x) { return std::abs(mu.density_1d(x) - nu.density_1d(x)); };
    const auto breaks = joint_breakpoints(mu, nu);
    DistanceEstimate e;
    e.name = "tv";
    e.method = "quadrature";
    e.value = quad::integrate_line(g, std::min(a.lo, b.lo), std::max(a.hi, b.hi), breaks, c, scale, 1e-10).value;
    e.value = std::clamp(e.value, 0.0, 2.0);
    return e;
}

}  // namespace

DistanceEstimate tv_distance(const DistributionSpec& mu, const DistributionSpec& nu, std::size_t budget,
                             std::uint64_t seed) {
    require_same_dim(mu, nu);
    if (same_law(mu, nu)) {
        DistanceEstimate e;
        e.name = "tv";
        e.method = mu.dim() == 1 ? "quadrature" : "monte-carlo";
        if (mu.dim() != 1) e.std_error = 0.0;
        return e;
    }
    if (mu.dim() == 1) return quadrature_tv(mu, nu);

    // Balanced mixture proposal h = (f + g) / 2; the weight |f - g| / h equals
    // 2 |tanh((log f - log g) / 2)|, which is bounded by 2.
    const auto n = static_cast<std::size_t>(mu.dim());
    const auto stats = kernels::monte_carlo(
        seed, budget,
        [&](Rng& rng) {
            std::array<double, 8> buf{};
            const std::span<double> x(buf.data(), n);
            if (rng.uniform_open() < 0.5) {
                mu.draw(rng, x);
            } else {
                nu.draw(rng, x);
            }
            const double lf = mu.log_density(x);
            const double lg = nu.log_density(x);
            if (lf == -kInf || lg == -kInf) return 2.0;
            return 2.0 * std::abs(std::tanh(0.5 * (lf - lg)));
        },
        Execution::Parallel);
    DistanceEstimate e;
    e.name = "tv";
    e.method = "monte-carlo";
    e.value = stats.mean;
    e.std_error = stats.std_error();
    return e;
}

DistanceEstimate tv_distance_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.dim() != b.dim()) throw ParameterError("b", "point clouds must share a dimension");
    struct Atom {
        std::span<const double> x;
        double signed_mass;
    };
    std::vector<Atom> atoms;
    atoms.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) atoms.push_back({a.point(i), a.weights()[i]});
    for (std::size_t j = 0; j < b.size(); ++j) atoms.push_back({b.point(j), -b.weights()[j]});
    std::sort(atoms.begin(), atoms.end(), [&](const Atom& l, const Atom& r) {
        return std::lexicographical_compare(l.x.begin(), l.x.end(), r.x.begin(), r.x.end());
    });
    double total = 0.0;
    std::size_t k = 0;
    while (k < atoms.size()) {
        double mass = 0.0;
        std::size_t end = k;
        while (end < atoms.size() && std::equal(atoms[k].x.begin(), atoms[k].x.end(), atoms[end].x.begin())) {
            mass += atoms[end].signed_mass;
            ++end;
        }
        total += std::abs(mass);
        k = end;
    }
    DistanceEstimate e;
    e.name = "tv";
    e.method = "union-support";
    e.value = std::min(total, 2.0);
    return e;
}

DistanceEstimate bl_distance_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.dim() != b.dim()) throw ParameterError("b", "point clouds must share a dimension");
    auto cost = kernels::cost_matrix(a.points(), b.points(), a.dim(), 1.0, Execution::Parallel);
    for (double& c : cost) c = std::min(c, 2.0);
    const TransportPlan plan = exact_ot_from_cost(cost, a.weights(), b.weights());
    if (plan.slackness_residual > 1e-8 || plan.duality_gap > 1e-8) {
        throw EstimatorError("bounded-Lipschitz LP: optimality certificate failed");
    }
    DistanceEstimate e;
    e.name = "bl";
    e.method = "lp";
    e.value = std::clamp(plan.cost, 0.0, 2.0);
    return e;
}

DistanceEstimate bl_distance(const DistributionSpec& mu, const DistributionSpec& nu, std::size_t m,
                             std::uint64_t seed) {
    require_same_dim(mu, nu);
    const auto draw = [&](const DistributionSpec& spec, std::uint64_t stream) {
        const std::uint64_t s = mix_seed(seed, stream);
        return spec.dim() == 1 ? sample_stratified_1d(spec, s, m) : sample(spec, s, m);
    };
    const EmpiricalMeasure a = draw(mu, 0);
    const EmpiricalMeasure b = draw(nu, 1);
    const double floor_mu = bl_distance_empirical(a, draw(mu, 2)).value;
    const double floor_nu = bl_distance_empirical(b, draw(nu, 3)).value;
    DistanceEstimate e;
    e.name = "bl";
    e.method = mu.dim() == 1 ? "lp-stratified-sample" : "lp-sample";
    e.value = same_law(mu, nu) ? 0.0 : bl_distance_empirical(a, b).value;
    e.std_error = 0.5 * (floor_mu + floor_nu);
    return e;
}

DistanceEstimate wasserstein_1d(const DistributionSpec& mu, const DistributionSpec& nu, double p) {
    if (mu.dim() != 1 || nu.dim() != 1) throw ParameterError("mu", "wasserstein_1d needs 1D specs");
    if (!(p >= 1.0)) throw ParameterError("p", "Wasserstein order must be >= 1");
    for (const auto* spec : {&mu, &nu}) {
        const Tail t = spec->radial_tail();
        if (t.kind == TailKind::Polynomial && !(p < t.rate - 1.0)) return infinite_estimate("wasserstein", p);
    }
    DistanceEstimate e;
    e.name = "wasserstein";
    e.p = p;
    e.method = "quantile-quadrature";
    if (same_law(mu, nu)) return e;
    const auto g = [&](double u, double uc) {
        const double d = std::abs(mu.quantile_1d(u, uc) - nu.quantile_1d(u, uc));
        return p == 1.0 ? d : std::pow(d, p);
    };
    const double integral = quad::integrate_unit(g, 1e-10).value;
    e.value = std::pow(std::max(0.0, integral), 1.0 / p);
    return e;
}

DistanceEstimate wasserstein_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                                       OtSolver solver, const SinkhornOptions& sinkhorn) {
    DistanceEstimate e;
    e.name = "wasserstein";
    e.p = p;
    if (solver == OtSolver::Exact) {
        const TransportPlan plan = exact_ot_cost(a, b, p);
        e.method = "exact-ot";
        e.value = plan.distance();
    } else {
        const TransportPlan plan = sinkhorn_ot_cost(a, b, p, sinkhorn);
        e.method = plan.converged ? "sinkhorn" : "sinkhorn-unconverged";
        e.value = plan.distance();
    }
    return e;
}

bool renyi_is_finite(const DistributionSpec& mu, const DistributionSpec& nu, double p) {
    require_same_dim(mu, nu);
    if (!(p > 0.0)) throw ParameterError("p", "divergence order must be positive");
    const int n = mu.dim();
    if (n == 1) {
        const Interval sf = mu.support_1d();
        const Interval sg = nu.support_1d();
        if (p < 1.0) return std::max(sf.lo, sg.lo) < std::min(sf.hi, sg.hi);
        if (sf.lo < sg.lo || sf.hi > sg.hi) return false;
        return tail_side_finite(mu.left_tail_1d(), nu.left_tail_1d(), p, 1) &&
               tail_side_finite(mu.right_tail_1d(), nu.right_tail_1d(), p, 1);
    }
    if (p < 1.0) return true;
    const bool gaussian_f = mu.family() != Family::CauchyType;
    const bool gaussian_g = nu.family() != Family::CauchyType;
    if (gaussian_f && gaussian_g) {
        if (p == 1.0) return true;
        const Eigen::MatrixXd prec_f = mu.covariance().inverse();
        const Eigen::MatrixXd prec_g = nu.covariance().inverse();
        const Eigen::MatrixXd combined = p * prec_f - (p - 1.0) * prec_g;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (combined + combined.transpose()));
        return eig.eigenvalues().minCoeff() > 0.0;
    }
    return tail_side_finite(mu.radial_tail(), nu.radial_tail(), p, n);
}

DistanceEstimate renyi_divergence(const DistributionSpec& mu, const DistributionSpec& nu, double p,
                                  std::size_t budget, std::uint64_t seed) {
    const std::string name = p == 1.0 ? "kl" : "renyi";
    if (!renyi_is_finite(mu, nu, p)) return infinite_estimate(name, p);
    DistanceEstimate e;
    e.name = name;
    e.p = p;
    if (same_law(mu, nu)) {
        e.method = mu.dim() == 1 ? "quadrature" : "monte-carlo";
        if (mu.dim() != 1) e.std_error = 0.0;
        return e;
    }

    if (mu.dim() == 1) {
        e.method = "quadrature";
        const Interval sf = mu.support_1d();
        const Interval sg = nu.support_1d();
        const double lo = p < 1.0 ? std::max(sf.lo, sg.lo) : sf.lo;
        const double hi = p < 1.0 ? std::min(sf.hi, sg.hi) : sf.hi;
        const auto breaks = joint_breakpoints(mu, nu);
        if (p == 1.0) {
            const auto g = [&](double x) {
                const double lf = mu.log_density_1d(x);
                if (lf == -kInf) return 0.0;
                return std::exp(lf) * (lf - nu.log_density_1d(x));
            };
            e.value = quad::integrate_line(g, lo, hi, breaks, mu.center_1d(), mu.spread_1d(), 1e-11).value;
        } else {
            const auto g = [&](double x) {
                const double lf = mu.log_density_1d(x);
                const double lg = nu.log_density_1d(x);
                if (lf == -kInf || lg == -kInf) return 0.0;
                return std::exp(p * lf + (1.0 - p) * lg);
            };
            const double integral =
                quad::integrate_line(g, lo, hi, breaks, mu.center_1d(), mu.spread_1d(), 1e-11).value;
            e.value = std::log(integral) / (p - 1.0);
        }
        e.value = std::max(0.0, e.value);
        return e;
    }

    const auto n = static_cast<std::size_t>(mu.dim());
    const auto stats = kernels::monte_carlo(
        seed, budget,
        [&](Rng& rng) {
            std::array<double, 8> buf{};
            const std::span<double> x(buf.data(), n);
            mu.draw(rng, x);
            const double log_ratio = mu.log_density(x) - nu.log_density(x);
            return p == 1.0 ? log_ratio : std::exp((p - 1.0) * log_ratio);
        },
        Execution::Parallel);
    e.method = "monte-carlo";
    if (p == 1.0) {
        e.value = stats.mean;
        e.std_error = stats.std_error();
    } else {
        e.value = std::log(stats.mean) / (p - 1.0);
        e.std_error = stats.std_error() / (stats.mean * std::abs(p - 1.0));
    }
    return e;
}

DistanceEstimate kl_divergence(const DistributionSpec& mu, const DistributionSpec& nu, std::size_t budget,
                               std::uint64_t seed) {
    return renyi_divergence(mu, nu, 1.0, budget, seed);
}

double tsallis_from_renyi(double renyi, double p) {
    if (!(p > 1.0)) throw ParameterError("p", "Tsallis order must exceed 1");
    if (renyi == kInf) return kInf;
    return std::expm1((p - 1.0) * renyi) / (p - 1.0);
}

DistanceEstimate tsallis_divergence(const DistributionSpec& mu, const DistributionSpec& nu, double p,
                                    std::size_t budget, std::uint64_t seed) {
    if (!(p > 1.0)) throw ParameterError("p", "Tsallis order must exceed 1");
    DistanceEstimate d = renyi_divergence(mu, nu, p, budget, seed);
    d.name = "tsallis";
    if (!d.finite) return d;
    const double value = tsallis_from_renyi(d.value, p);
    if (d.std_error) d.std_error = *d.std_error * std::exp((p - 1.0) * d.value);
    d.value = value;
    return d;
}

}  // namespace convexmetrics
