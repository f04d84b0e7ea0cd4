#include "convexmetrics/measures.hpp"

#include "convexmetrics/error.hpp"
#include "convexmetrics/quadrature.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace convexmetrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int tail_strength(TailKind k) {
    switch (k) {
        case TailKind::Polynomial: return 0;
        case TailKind::Exponential: return 1;
        case TailKind::Gaussian: return 2;
        case TailKind::Bounded: return 3;
    }
    return 0;
}

// The heavier of two tails.
Tail heavier(const Tail& a, const Tail& b) {
    const int sa = tail_strength(a.kind);
    const int sb = tail_strength(b.kind);
    if (sa != sb) return sa < sb ? a : b;
    return a.rate <= b.rate ? a : b;
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

// ---------------------------------------------------------------------------
// convexity parameters

double kappa_from_s(double s, int n) {
    if (n < 1) throw ParameterError("n", "dimension must be at least 1");
    if (!(s * n < 1.0)) throw ParameterError("s", "Borell relation needs s * n < 1");
    return s / (1.0 - s * n);
}

double s_from_kappa(double kappa, int n) {
    if (n < 1) throw ParameterError("n", "dimension must be at least 1");
    if (kappa == kInf) return 1.0 / n;
    if (!(kappa * n > -1.0)) throw ParameterError("kappa", "Borell relation needs kappa * n > -1");
    return kappa / (1.0 + kappa * n);
}

ConvexityParams ConvexityParams::from_s(double s, int n) {
    ConvexityParams c;
    c.s = s;
    c.n = n;
    if (s * n == 1.0) {
        c.kappa = kInf;
    } else {
        c.kappa = kappa_from_s(s, n);
    }
    return c;
}

double generalized_mean(double alpha, double lambda, double a, double b) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda", "must lie in [0, 1]");
    if (!(a >= 0.0)) throw ParameterError("a", "must be nonnegative");
    if (!(b >= 0.0)) throw ParameterError("b", "must be nonnegative");
    if (alpha == -kInf) return std::min(a, b);
    if (alpha == kInf) return std::max(a, b);
    if (lambda == 0.0) return a;
    if (lambda == 1.0) return b;
    if (a == 0.0 || b == 0.0) {
        if (alpha <= 0.0) return 0.0;
        const double other = a == 0.0 ? b : a;
        const double w = a == 0.0 ? lambda : 1.0 - lambda;
        return std::pow(w, 1.0 / alpha) * other;
    }
    const double la = std::log(a);
    const double lb = std::log(b);
    if (alpha == 0.0) return std::exp((1.0 - lambda) * la + lambda * lb);
    const double spread = std::max(std::abs(la), std::abs(lb));
    if (std::abs(alpha) * spread < 1e-2) {
        // Series-stable form near alpha = 0.
        const double inner = (1.0 - lambda) * std::expm1(alpha * la) + lambda * std::expm1(alpha * lb);
        return std::exp(std::log1p(inner) / alpha);
    }
    const double ta = alpha * la + std::log1p(-lambda);
    const double tb = alpha * lb + std::log(lambda);
    const double peak = std::max(ta, tb);
    const double log_sum = peak + std::log(std::exp(ta - peak) + std::exp(tb - peak));
    return std::exp(log_sum / alpha);
}

// ---------------------------------------------------------------------------
// families

std::string_view family_name(Family f) {
    switch (f) {
        case Family::StdGaussian: return "std-gaussian";
        case Family::Gaussian: return "gaussian";
        case Family::CauchyType: return "cauchy-type";
        case Family::ExponentialCentered: return "exponential-centered";
        case Family::UniformInterval: return "uniform-interval";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    for (Family f : {Family::StdGaussian, Family::Gaussian, Family::CauchyType,
                     Family::ExponentialCentered, Family::UniformInterval}) {
        if (family_name(f) == name) return f;
    }
    throw ParameterError("family", "unknown family '" + std::string(name) + "'");
}

AffineMap AffineMap::identity(int n) {
    AffineMap m;
    m.shift.assign(static_cast<std::size_t>(n), 0.0);
    m.scale.assign(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i) m.scale[static_cast<std::size_t>(i * n + i)] = 1.0;
    return m;
}

DistributionSpec::DistributionSpec(Family family, FamilyParams params, Eigen::VectorXd base_shift,
                                   Eigen::MatrixXd base_scale, double s)
    : family_(family),
      params_(std::move(params)),
      user_affine_(AffineMap::identity(params_.n)),
      canonical_shift_(std::move(base_shift)),
      canonical_scale_(std::move(base_scale)),
      conv_(ConvexityParams::from_s(s, params_.n)) {
    const int n = params_.n;
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            base_log_norm_ = -0.5 * n * std::log(2.0 * std::numbers::pi);
            break;
        case Family::CauchyType:
            base_log_norm_ = std::lgamma(0.5 * (n + params_.beta)) - 0.5 * n * std::log(std::numbers::pi) -
                             std::lgamma(0.5 * params_.beta);
            break;
        case Family::ExponentialCentered:
        case Family::UniformInterval:
            base_log_norm_ = 0.0;
            break;
    }
    refresh_map();
}

void DistributionSpec::refresh_map() {
    const int n = params_.n;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> user(
        user_affine_.scale.data(), n, n);
    const Eigen::Map<const Eigen::VectorXd> user_shift(user_affine_.shift.data(), n);
    scale_ = user * canonical_scale_;
    shift_ = user * canonical_shift_ + user_shift;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(scale_);
    const double det = lu.determinant();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        throw ParameterError("affine", "scale matrix must be invertible");
    }
    inverse_scale_ = lu.inverse();
    log_abs_det_ = std::log(std::abs(det));
}

DistributionSpec DistributionSpec::std_gaussian(int n) {
    if (n < 1) throw ParameterError("n", "dimension must be at least 1");
    FamilyParams p;
    p.n = n;
    return DistributionSpec(Family::StdGaussian, p, Eigen::VectorXd::Zero(n),
                            Eigen::MatrixXd::Identity(n, n), 0.0);
}

DistributionSpec DistributionSpec::gaussian(std::vector<double> mean, std::vector<double> covariance) {
    const int n = static_cast<int>(mean.size());
    if (n < 1) throw ParameterError("mean", "dimension must be at least 1");
    if (covariance.size() != static_cast<std::size_t>(n * n)) {
        throw ParameterError("covariance", "must be an n x n matrix");
    }
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> cov(
        covariance.data(), n, n);
    if (!cov.isApprox(cov.transpose(), 1e-12)) throw ParameterError("covariance", "must be symmetric");
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw ParameterError("covariance", "must be positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    const Eigen::Map<const Eigen::VectorXd> m(mean.data(), n);
    FamilyParams p;
    p.n = n;
    p.mean = mean;
    p.covariance = covariance;
    return DistributionSpec(Family::Gaussian, p, m, chol, 0.0);
}

DistributionSpec DistributionSpec::cauchy_type(int n, double beta, double scale) {
    if (n < 1 || n > 8) throw ParameterError("n", "cauchy-type supports dimensions 1..8");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta", "must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("scale", "must be positive");
    FamilyParams p;
    p.n = n;
    p.beta = beta;
    p.scale = scale;
    return DistributionSpec(Family::CauchyType, p, Eigen::VectorXd::Zero(n),
                            scale * Eigen::MatrixXd::Identity(n, n), -1.0 / beta);
}

DistributionSpec DistributionSpec::exponential_centered() {
    FamilyParams p;
    p.n = 1;
    return DistributionSpec(Family::ExponentialCentered, p, Eigen::VectorXd::Zero(1),
                            Eigen::MatrixXd::Identity(1, 1), 0.0);
}

DistributionSpec DistributionSpec::uniform_interval(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw ParameterError("b", "uniform-interval needs finite a < b");
    }
    FamilyParams p;
    p.n = 1;
    p.a = a;
    p.b = b;
    return DistributionSpec(Family::UniformInterval, p, Eigen::VectorXd::Constant(1, a),
                            Eigen::MatrixXd::Constant(1, 1, b - a), 1.0);
}

DistributionSpec DistributionSpec::with_affine(const AffineMap& outer) const {
    const int n = dim();
    if (outer.shift.size() != static_cast<std::size_t>(n) ||
        outer.scale.size() != static_cast<std::size_t>(n * n)) {
        throw ParameterError("affine", "shift/scale dimensions do not match the spec");
    }
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMat> a(outer.scale.data(), n, n);
    const Eigen::Map<const Eigen::VectorXd> c(outer.shift.data(), n);
    const Eigen::Map<const RowMat> u(user_affine_.scale.data(), n, n);
    const Eigen::Map<const Eigen::VectorXd> us(user_affine_.shift.data(), n);
    const RowMat composed = a * u;
    const Eigen::VectorXd composed_shift = a * us + c;

    DistributionSpec out = *this;
    out.user_affine_.scale.assign(composed.data(), composed.data() + n * n);
    out.user_affine_.shift.assign(composed_shift.data(), composed_shift.data() + n);
    out.refresh_map();
    return out;
}

double DistributionSpec::normalization() const {
    return std::exp(base_log_norm_ - log_abs_det_);
}

double DistributionSpec::base_log_density_1d(double y) const {
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            return base_log_norm_ - 0.5 * y * y;
        case Family::CauchyType:
            return base_log_norm_ - 0.5 * (1.0 + params_.beta) * std::log1p(y * y);
        case Family::ExponentialCentered:
            return y >= -1.0 ? -(y + 1.0) : -kInf;
        case Family::UniformInterval:
            return (y >= 0.0 && y <= 1.0) ? 0.0 : -kInf;
    }
    return -kInf;
}

double DistributionSpec::base_log_density(const Eigen::VectorXd& y) const {
    if (y.size() == 1) return base_log_density_1d(y[0]);
    const double sq = y.squaredNorm();
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            return base_log_norm_ - 0.5 * sq;
        case Family::CauchyType:
            return base_log_norm_ - 0.5 * (params_.n + params_.beta) * std::log1p(sq);
        default:
            return -kInf;
    }
}

double DistributionSpec::log_density(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(dim())) {
        throw ParameterError("x", "dimension mismatch");
    }
    if (dim() == 1) return log_density_1d(x[0]);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), dim());
    const Eigen::VectorXd y = inverse_scale_ * (xv - shift_);
    return base_log_density(y) - log_abs_det_;
}

double DistributionSpec::density(std::span<const double> x) const {
    return std::exp(log_density(x));
}

double DistributionSpec::log_density_1d(double x) const {
    const double y = (x - shift_[0]) * inverse_scale_(0, 0);
    return base_log_density_1d(y) - log_abs_det_;
}

double DistributionSpec::density_1d(double x) const {
    return std::exp(log_density_1d(x));
}

Interval DistributionSpec::support_1d() const {
    double lo = -kInf;
    double hi = kInf;
    switch (family_) {
        case Family::ExponentialCentered: lo = -1.0; break;
        case Family::UniformInterval: lo = 0.0; hi = 1.0; break;
        default: break;
    }
    const double s = scale_(0, 0);
    const double t = shift_[0];
    const auto map = [&](double y) { return std::isfinite(y) ? t + s * y : (s > 0 ? y : -y); };
    double a = map(lo);
    double b = map(hi);
    if (a > b) std::swap(a, b);
    return {a, b};
}

std::vector<double> DistributionSpec::support_breakpoints_1d() const {
    const Interval sup = support_1d();
    std::vector<double> out;
    if (std::isfinite(sup.lo)) out.push_back(sup.lo);
    if (std::isfinite(sup.hi)) out.push_back(sup.hi);
    return out;
}

double DistributionSpec::center_1d() const {
    const double base_center = family_ == Family::UniformInterval ? 0.5 : 0.0;
    return shift_[0] + scale_(0, 0) * base_center;
}

double DistributionSpec::spread_1d() const {
    return std::abs(scale_(0, 0));
}

double DistributionSpec::base_cdf(double y) const {
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            return 0.5 * std::erfc(-y / std::numbers::sqrt2);
        case Family::CauchyType: {
            const boost::math::students_t_distribution<double> t(params_.beta);
            return boost::math::cdf(t, y * std::sqrt(params_.beta));
        }
        case Family::ExponentialCentered:
            return y < -1.0 ? 0.0 : -std::expm1(-(y + 1.0));
        case Family::UniformInterval:
            return std::clamp(y, 0.0, 1.0);
    }
    return 0.0;
}

double DistributionSpec::base_ccdf(double y) const {
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            return 0.5 * std::erfc(y / std::numbers::sqrt2);
        case Family::CauchyType: {
            const boost::math::students_t_distribution<double> t(params_.beta);
            return boost::math::cdf(boost::math::complement(t, y * std::sqrt(params_.beta)));
        }
        case Family::ExponentialCentered:
            return y < -1.0 ? 1.0 : std::exp(-(y + 1.0));
        case Family::UniformInterval:
            return 1.0 - std::clamp(y, 0.0, 1.0);
    }
    return 0.0;
}

double DistributionSpec::base_quantile(double u, double uc) const {
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            return u < 0.5 ? -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u)
                           : std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uc);
        case Family::CauchyType: {
            const boost::math::students_t_distribution<double> t(params_.beta);
            const double q = u < 0.5 ? boost::math::quantile(t, u)
                                     : boost::math::quantile(boost::math::complement(t, uc));
            return q / std::sqrt(params_.beta);
        }
        case Family::ExponentialCentered:
            return u < 0.5 ? -1.0 - std::log1p(-u) : -1.0 - std::log(uc);
        case Family::UniformInterval:
            return u < 0.5 ? u : 1.0 - uc;
    }
    return 0.0;
}

double DistributionSpec::cdf_1d(double x) const {
    if (dim() != 1) throw ParameterError("spec", "cdf_1d needs a one-dimensional spec");
    const double s = scale_(0, 0);
    const double y = (x - shift_[0]) / s;
    return s > 0 ? base_cdf(y) : base_ccdf(y);
}

double DistributionSpec::quantile_1d(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw ParameterError("u", "quantile level must lie in (0, 1)");
    return quantile_1d(u, 1.0 - u);
}

double DistributionSpec::quantile_1d(double u, double uc) const {
    if (dim() != 1) throw ParameterError("spec", "quantile_1d needs a one-dimensional spec");
    // u may round to 1 while uc > 0 still carries the level; only the pair matters.
    if (!(u > 0.0 && uc > 0.0 && u <= 1.0 && uc <= 1.0)) {
        throw ParameterError("u", "quantile level must lie in (0, 1)");
    }
    const double s = scale_(0, 0);
    const double y = s > 0 ? base_quantile(u, uc) : base_quantile(uc, u);
    return shift_[0] + s * y;
}

bool DistributionSpec::has_finite_mean() const {
    return family_ != Family::CauchyType || params_.beta > 1.0;
}

bool DistributionSpec::has_finite_variance() const {
    return family_ != Family::CauchyType || params_.beta > 2.0;
}

Eigen::VectorXd DistributionSpec::mean() const {
    const int n = dim();
    if (!has_finite_mean()) return Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    Eigen::VectorXd base = Eigen::VectorXd::Zero(n);
    if (family_ == Family::UniformInterval) base[0] = 0.5;
    return scale_ * base + shift_;
}

Eigen::MatrixXd DistributionSpec::covariance() const {
    const int n = dim();
    if (!has_finite_variance()) return Eigen::MatrixXd::Constant(n, n, kInf);
    double base_var = 1.0;
    if (family_ == Family::CauchyType) base_var = 1.0 / (params_.beta - 2.0);
    if (family_ == Family::UniformInterval) base_var = 1.0 / 12.0;
    return base_var * scale_ * scale_.transpose();
}

Tail DistributionSpec::left_tail_1d() const {
    const double s = scale_(0, 0);
    switch (family_) {
        case Family::StdGaussian:
        case Family::Gaussian:
            return {TailKind::Gaussian, 1.0 / (2.0 * s * s)};
        case Family::CauchyType:
            return {TailKind::Polynomial, 1.0 + params_.beta};
        case Family::ExponentialCentered:
            return s > 0 ? Tail{TailKind::Bounded, 0.0} : Tail{TailKind::Exponential, 1.0 / std::abs(s)};
        case Family::UniformInterval:
            return {TailKind::Bounded, 0.0};
    }
    return {};
}

Tail DistributionSpec::right_tail_1d() const {
    const double s = scale_(0, 0);
    if (family_ == Family::ExponentialCentered) {
        return s > 0 ? Tail{TailKind::Exponential, 1.0 / std::abs(s)} : Tail{TailKind::Bounded, 0.0};
    }
    return left_tail_1d();
}

Tail DistributionSpec::radial_tail() const {
    if (dim() == 1) return heavier(left_tail_1d(), right_tail_1d());
    if (family_ == Family::CauchyType) return {TailKind::Polynomial, dim() + params_.beta};
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scale_ * scale_.transpose());
    return {TailKind::Gaussian, 1.0 / (2.0 * eig.eigenvalues().maxCoeff())};
}

void DistributionSpec::draw(Rng& rng, std::span<double> out) const {
    const int n = dim();
    if (n == 1) {
        const double u = rng.uniform_open();
        out[0] = quantile_1d(u, 1.0 - u);
        return;
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    if (family_ == Family::CauchyType) y /= std::sqrt(rng.chi_square(params_.beta));
    const Eigen::VectorXd x = scale_ * y + shift_;
    std::copy(x.data(), x.data() + n, out.begin());
}

// ---------------------------------------------------------------------------
// sampling and isotropization

EmpiricalMeasure sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t m,
                        Execution exec) {
    if (m < 1) throw ParameterError("m", "need at least one sample");
    const auto n = static_cast<std::size_t>(spec.dim());
    std::vector<double> points(m * n);
    const std::size_t chunks = (m + kernels::kChunkSize - 1) / kernels::kChunkSize;
    const auto run_chunk = [&](std::size_t k) {
        Rng rng(mix_seed(seed, k));
        const std::size_t end = std::min(m, (k + 1) * kernels::kChunkSize);
        for (std::size_t i = k * kernels::kChunkSize; i < end; ++i) {
            spec.draw(rng, std::span<double>(points.data() + i * n, n));
        }
    };
    if (exec == Execution::Parallel) {
        const auto count = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < count; ++k) run_chunk(static_cast<std::size_t>(k));
    } else {
        for (std::size_t k = 0; k < chunks; ++k) run_chunk(k);
    }
    return EmpiricalMeasure::uniform(n, std::move(points));
}

EmpiricalMeasure sample_stratified_1d(const DistributionSpec& spec, std::uint64_t seed, std::size_t m) {
    if (spec.dim() != 1) throw ParameterError("spec", "stratified sampling is one-dimensional");
    if (m < 1) throw ParameterError("m", "need at least one sample");
    Rng rng(seed);
    std::vector<double> points(m);
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double jitter = rng.uniform_open();
        const double u = (static_cast<double>(i) + jitter) * inv;
        const double uc = (static_cast<double>(m - 1 - i) + (1.0 - jitter)) * inv;
        points[i] = spec.quantile_1d(u, uc);
    }
    return EmpiricalMeasure::uniform(1, std::move(points));
}

DistributionSpec isotropize(const DistributionSpec& spec, std::size_t sample_budget, std::uint64_t seed) {
    if (spec.convexity().s <= -0.5 || !spec.has_finite_variance()) {
        throw PreconditionError("infinite variance regime: isotropization needs s > -1/2");
    }
    const int n = spec.dim();
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;
    if (n == 1 || sample_budget == 0) {
        mu = spec.mean();
        cov = spec.covariance();
    } else {
        const EmpiricalMeasure pts = sample(spec, seed, sample_budget);
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
            pts.points().data(), static_cast<Eigen::Index>(pts.size()), n);
        mu = x.colwise().mean().transpose();
        const Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
        cov = centered.transpose() * centered / static_cast<double>(pts.size() - 1);
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw EstimatorError("covariance is not positive definite");
    const Eigen::MatrixXd l_inv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::VectorXd c = -l_inv * mu;

    AffineMap whiten;
    whiten.shift.assign(c.data(), c.data() + n);
    whiten.scale.resize(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) whiten.scale[static_cast<std::size_t>(i * n + j)] = l_inv(i, j);
    }
    return spec.with_affine(whiten);
}

// ---------------------------------------------------------------------------
// functionals

namespace {

quad::Result integrate_against_density(const DistributionSpec& spec,
                                       const std::function<double(double)>& g, double rel_tol,
                                       std::vector<double> extra_breaks = {}) {
    const Interval sup = spec.support_1d();
    std::vector<double> breaks = spec.support_breakpoints_1d();
    breaks.push_back(spec.center_1d());
    breaks.insert(breaks.end(), extra_breaks.begin(), extra_breaks.end());
    return quad::integrate_line(g, sup.lo, sup.hi, breaks, spec.center_1d(), spec.spread_1d(), rel_tol);
}

bool polynomial_moment_finite(const Tail& tail, int n, double p) {
    // Radial density ~ r^(-rate); E|X|^p needs p + n - rate < 0.
    return tail.kind != TailKind::Polynomial || p < tail.rate - n;
}

}  // namespace

ScalarEstimate abs_moment(const DistributionSpec& spec, double p, std::size_t budget, std::uint64_t seed) {
    if (!(p >= 1.0)) throw ParameterError("p", "moment order must be >= 1");
    ScalarEstimate out;
    if (!polynomial_moment_finite(spec.radial_tail(), spec.dim(), p)) {
        out.value = kInf;
        out.finite = false;
        return out;
    }
    if (spec.dim() == 1) {
        const auto g = [&](double x) {
            const double lf = spec.log_density_1d(x);
            if (lf == -kInf) return 0.0;
            return x == 0.0 ? 0.0 : std::exp(p * std::log(std::abs(x)) + lf);
        };
        out.value = integrate_against_density(spec, g, 1e-11, {0.0}).value;
        return out;
    }
    const auto n = static_cast<std::size_t>(spec.dim());
    const auto stats = kernels::monte_carlo(
        seed, budget,
        [&](Rng& rng) {
            std::array<double, 8> buf{};
            spec.draw(rng, std::span<double>(buf.data(), n));
            double sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) sq += buf[i] * buf[i];
            return std::pow(sq, 0.5 * p);
        },
        Execution::Parallel);
    out.value = stats.mean;
    out.std_error = stats.std_error();
    out.monte_carlo = true;
    return out;
}

ScalarEstimate exp_quadratic_moment(const DistributionSpec& spec, double c) {
    if (!(c > 0.0)) throw ParameterError("c", "exponent coefficient must be positive");
    ScalarEstimate out;
    const auto infinite = [&] {
        out.value = kInf;
        out.finite = false;
        return out;
    };
    const int n = spec.dim();
    if (n == 1) {
        for (const Tail& t : {spec.left_tail_1d(), spec.right_tail_1d()}) {
            if (t.kind == TailKind::Exponential || t.kind == TailKind::Polynomial) return infinite();
            if (t.kind == TailKind::Gaussian && !(0.5 * c < t.rate)) return infinite();
        }
        const auto g = [&](double x) {
            const double lf = spec.log_density_1d(x);
            return lf == -kInf ? 0.0 : std::exp(0.5 * c * x * x + lf);
        };
        out.value = integrate_against_density(spec, g, 1e-11).value;
        return out;
    }
    if (spec.family() == Family::CauchyType) return infinite();
    const Eigen::MatrixXd cov = spec.covariance();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (!(c * eig.eigenvalues().maxCoeff() < 1.0)) return infinite();
    const Eigen::MatrixXd shrink = Eigen::MatrixXd::Identity(n, n) - c * cov;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(shrink);
    const Eigen::VectorXd m = spec.mean();
    const double quad_form = m.dot(ldlt.solve(m));
    out.value = std::exp(0.5 * c * quad_form) / std::sqrt(shrink.determinant());
    return out;
}

namespace {

kernels::RunningStats neg_log_density_stats(const DistributionSpec& spec, std::size_t budget,
                                            std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(spec.dim());
    return kernels::monte_carlo(
        seed, budget,
        [&](Rng& rng) {
            std::array<double, 8> buf{};
            const std::span<double> x(buf.data(), n);
            spec.draw(rng, x);
            return -spec.log_density(x);
        },
        Execution::Parallel);
}

bool use_quadrature(const DistributionSpec& spec, EstimationMethod method) {
    if (method == EstimationMethod::MonteCarlo) return false;
    if (method == EstimationMethod::Quadrature && spec.dim() != 1) {
        throw ParameterError("method", "quadrature path is one-dimensional");
    }
    return spec.dim() == 1;
}

double entropy_quadrature(const DistributionSpec& spec) {
    const auto g = [&](double x) {
        const double lf = spec.log_density_1d(x);
        return lf == -kInf ? 0.0 : -std::exp(lf) * lf;
    };
    return integrate_against_density(spec, g, 1e-12).value;
}

}  // namespace

ScalarEstimate differential_entropy(const DistributionSpec& spec, std::size_t budget, std::uint64_t seed,
                                    EstimationMethod method) {
    ScalarEstimate out;
    if (use_quadrature(spec, method)) {
        out.value = entropy_quadrature(spec);
        return out;
    }
    const auto stats = neg_log_density_stats(spec, budget, seed);
    out.value = stats.mean;
    out.std_error = stats.std_error();
    out.monte_carlo = true;
    return out;
}

ScalarEstimate varentropy(const DistributionSpec& spec, std::size_t budget, std::uint64_t seed,
                          EstimationMethod method) {
    ScalarEstimate out;
    if (use_quadrature(spec, method)) {
        const double h = entropy_quadrature(spec);
        const auto g = [&](double x) {
            const double lf = spec.log_density_1d(x);
            if (lf == -kInf) return 0.0;
            const double d = lf + h;
            return std::exp(lf) * d * d;
        };
        out.value = integrate_against_density(spec, g, 1e-12).value;
        return out;
    }
    const auto stats = neg_log_density_stats(spec, budget, seed);
    out.value = stats.variance();
    out.std_error = stats.variance_std_error();
    out.monte_carlo = true;
    return out;
}

double max_density_1d(const DistributionSpec& spec) {
    if (spec.dim() != 1) throw ParameterError("spec", "max_density_1d needs a one-dimensional spec");
    const Interval sup = spec.support_1d();
    double best = 0.0;
    for (double e : spec.support_breakpoints_1d()) best = std::max(best, spec.density_1d(e));

    // Coarse scan over quantiles, then golden-section refinement around the best node.
    constexpr int kGrid = 2001;
    std::vector<double> xs(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        const double u = 1e-6 + (1.0 - 2e-6) * i / (kGrid - 1);
        xs[static_cast<std::size_t>(i)] = spec.quantile_1d(u);
    }
    std::size_t arg = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (spec.log_density_1d(xs[i]) > spec.log_density_1d(xs[arg])) arg = i;
    }
    const double lo = std::max(sup.lo, xs[arg == 0 ? 0 : arg - 1]);
    const double hi = std::min(sup.hi, xs[std::min(xs.size() - 1, arg + 1)]);
    const double x_star = golden_section_min([&](double x) { return -spec.log_density_1d(x); }, lo, hi, 1e-13);
    best = std::max({best, spec.density_1d(x_star), spec.density_1d(xs[arg])});
    return best;
}

double borell_tail_constant(const DistributionSpec& spec, int grid_points) {
    const double s = spec.convexity().s;
    if (!(s < 0.0)) throw ParameterError("s", "Borell tail bound is stated for s < 0");
    const int n = spec.dim();
    const double exponent = n - 1.0 / s;
    double best = 0.0;
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < grid_points; ++i) {
        const double r = std::pow(10.0, -3.0 + 9.0 * i / (grid_points - 1));
        for (int axis = 0; axis < n; ++axis) {
            for (double sign : {-1.0, 1.0}) {
                std::fill(x.begin(), x.end(), 0.0);
                x[static_cast<std::size_t>(axis)] = sign * r;
                const double f = spec.density(x);
                best = std::max(best, f * (1.0 + std::pow(r, exponent)));
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// smoothing

double huber(double r, double lambda) {
    if (!(lambda > 0.0)) throw ParameterError("lambda", "must be positive");
    const double a = std::abs(r);
    return a > lambda ? a - 0.5 * lambda : a * a / (2.0 * lambda);
}

double moreau_envelope_1d(const std::function<double(double)>& convex_fn, double epsilon, double x,
                          double search_radius) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon", "must be positive");
    if (!(search_radius > 0.0)) throw ParameterError("search_radius", "must be positive");
    const auto objective = [&](double y) { return convex_fn(y) + (x - y) * (x - y) / (2.0 * epsilon); };
    const double y_star = golden_section_min(objective, x - search_radius, x + search_radius, 1e-12);
    return std::min({objective(y_star), objective(x - search_radius), objective(x + search_radius),
                     convex_fn(x)});
}

double gaussian_convolve_1d(const DistributionSpec& spec, double t, double x) {
    if (spec.dim() != 1) throw ParameterError("spec", "gaussian_convolve_1d needs a one-dimensional spec");
    if (!(t > 0.0)) throw ParameterError("t", "smoothing scale must be positive");
    std::vector<double> breaks;
    for (double e : spec.support_breakpoints_1d()) breaks.push_back((x - e) / t);
    breaks.push_back((x - spec.center_1d()) / t);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto g = [&](double z) {
        const double lf = spec.log_density_1d(x - t * z);
        return lf == -kInf ? 0.0 : std::exp(lf - 0.5 * z * z) * inv_sqrt_2pi;
    };
    return quad::integrate_line(g, -kInf, kInf, breaks, 0.0, 1.0, 1e-12).value;
}

namespace {

// (f * phi_t - f)(x) as one integral of (f(x - t z) - f(x)) phi(z), so the
// quadrature tolerance is relative to the (small) difference itself.
double smoothing_residual(const DistributionSpec& spec, double t, double x) {
    std::vector<double> breaks;
    for (double e : spec.support_breakpoints_1d()) breaks.push_back((x - e) / t);
    breaks.push_back(0.0);
    const double fx = spec.density_1d(x);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto g = [&](double z) { return (spec.density_1d(x - t * z) - fx) * std::exp(-0.5 * z * z) * inv_sqrt_2pi; };
    return quad::integrate_line(g, -kInf, kInf, breaks, 0.0, 1.0, 1e-10).value;
}

}  // namespace

double l1_distance_to_smoothed(const DistributionSpec& spec, double t) {
    if (spec.dim() != 1) throw ParameterError("spec", "l1_distance_to_smoothed needs a one-dimensional spec");
    if (!(t > 0.0)) throw ParameterError("t", "smoothing scale must be positive");
    const auto g = [&](double x) { return std::abs(smoothing_residual(spec, t, x)); };
    std::vector<double> breaks = spec.support_breakpoints_1d();
    // At a jump the residual lives within a few t of the endpoint; cut there
    // so the first panels resolve it.
    for (double e : spec.support_breakpoints_1d()) {
        for (double k : {1.0, 4.0, 16.0}) {
            breaks.push_back(e - k * t);
            breaks.push_back(e + k * t);
        }
    }
    breaks.push_back(spec.center_1d());
    const double spread = std::max(spec.spread_1d(), 4.0 * t);
    return quad::integrate_line(g, -kInf, kInf, breaks, spec.center_1d(), spread, 1e-8, 1e-13).value;
}

double grad_l1_norm_1d(const DistributionSpec& spec) {
    if (spec.dim() != 1) throw ParameterError("spec", "grad_l1_norm_1d needs a one-dimensional spec");
    const Interval sup = spec.support_1d();
    const double h = 1e-5 * spec.spread_1d();
    const auto derivative = [&](double x) {
        if (x - h < sup.lo) return (spec.density_1d(x + h) - spec.density_1d(x)) / h;
        if (x + h > sup.hi) return (spec.density_1d(x) - spec.density_1d(x - h)) / h;
        return (spec.density_1d(x + h) - spec.density_1d(x - h)) / (2.0 * h);
    };
    std::vector<double> breaks = spec.support_breakpoints_1d();
    breaks.push_back(spec.center_1d());
    const double interior = quad::integrate_line([&](double x) { return std::abs(derivative(x)); }, sup.lo,
                                                 sup.hi, breaks, spec.center_1d(), spec.spread_1d(), 1e-10)
                                .value;
    double jumps = 0.0;
    for (double e : spec.support_breakpoints_1d()) jumps += spec.density_1d(e);
    return interior + jumps;
}

}  // namespace convexmetrics
