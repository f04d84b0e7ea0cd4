#include "convexmetrics/bounds.hpp"

#include "convexmetrics/error.hpp"
#include "convexmetrics/measures.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace convexmetrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_theorem_s(double s) {
    if (!(s > -0.5 && s < 0.0)) throw ParameterError("s", "must lie in (-1/2, 0)");
}

void require_dim(int n) {
    if (n < 1) throw ParameterError("n", "dimension must be at least 1");
}

void require_distance(const char* name, double d) {
    if (!(d >= 0.0)) throw ParameterError(name, "distance must be nonnegative");
}

BoundResult make_result(std::string id, std::vector<std::pair<std::string, double>> inputs) {
    BoundResult r;
    r.formula_id = std::move(id);
    r.inputs_echo = std::move(inputs);
    return r;
}

void flag(BoundResult& r, bool ok, const std::string& why) {
    if (!ok && r.in_validity_domain) {
        r.in_validity_domain = false;
        r.violated_precondition = why;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// config

const std::vector<std::string>& BoundConfig::constant_names() {
    static const std::vector<std::string> names{"c_dev",   "c_dev_exp", "c_norm", "c_maxdens", "c_regul",
                                                "c_tvbl",  "c_w1bl",    "c_wqwp", "c_kl",      "c_tsallis"};
    return names;
}

double BoundConfig::constant(const std::string& name) const {
    const auto it = constants.find(name);
    return it == constants.end() ? 1.0 : it->second;
}

void BoundConfig::set_constant(const std::string& name, double value) {
    const auto& names = constant_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw ParameterError(name, "unknown universal constant");
    }
    if (!(value > 0.0) || !std::isfinite(value)) throw ParameterError(name, "constant must be positive");
    constants[name] = value;
}

void BoundConfig::validate() const {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw ParameterError("alpha", "must lie in (1, 2]");
    const auto& names = constant_names();
    for (const auto& [name, value] : constants) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw ParameterError(name, "unknown universal constant");
        }
        if (!(value > 0.0) || !std::isfinite(value)) throw ParameterError(name, "constant must be positive");
    }
}

// ---------------------------------------------------------------------------
// lemmas and constants

double minimize_lemma(double A, double B, double m, double p, double M) {
    if (!(A > 0.0)) throw ParameterError("A", "must be positive");
    if (!(B > 0.0)) throw ParameterError("B", "must be positive");
    if (!(m > 0.0)) throw ParameterError("m", "must be positive");
    if (!(p > 0.0)) throw ParameterError("p", "must be positive");
    if (!(M > 0.0)) throw ParameterError("M", "must be positive");
    const double mp = m + p;
    // log of (A/B) M^(m+p), kept in logs so extreme M does not overflow.
    const double log_k = std::max(std::log(A / B) + mp * std::log(M), std::log(p / m));
    const double lead = std::exp((p / mp) * std::log(A) + (m / mp) * std::log(B));
    return lead * (std::exp((m / mp) * log_k) + std::exp(-(p / mp) * log_k));
}

double const_C(double p, double s) {
    if (!(p >= 1.0)) throw ParameterError("p", "must be >= 1");
    if (!(s > -1.0 / p && s < 0.0)) throw ParameterError("s", "must lie in (-1/p, 0)");
    if (s > -1.0 / (p + 1.0)) return p;
    const double a = std::abs(s);
    return 1.0 / (std::pow(a, 1.0 - 1.0 / p) * std::pow(1.0 - p * a, 1.0 / p));
}

double const_d0(int n, double s) {
    require_dim(n);
    require_theorem_s(s);
    const double a = 1.0 + n * std::abs(s);
    return std::pow(a, 4.0 * a) / (1.0 + 2.0 * s);
}

double const_c0(int n, double s) {
    require_dim(n);
    require_theorem_s(s);
    const double kappa = kappa_from_s(s, n);
    const double e = 1.0 + n * kappa;
    return std::pow(e / 4.0 * grunbaum_lower(s) / 2.0, 4.0 / e);
}

double const_c2(double s) {
    require_theorem_s(s);
    return (1.0 + 2.0 * s) * grunbaum_lower(s) / 2.0;
}

double const_c1_bound(double s) {
    require_theorem_s(s);
    return grunbaum_lower(s) / 2.0;
}

C1Exact const_c1_exact(int n, double s) {
    const double c0 = const_c0(n, s);
    const double kappa = kappa_from_s(s, n);
    const double target = -n * std::log(c0);
    const double top = 1.0 + n * kappa;  // smallest 1 + i kappa (kappa < 0)
    const auto excess = [&](double a) {
        double sum = 0.0;
        for (int i = 1; i <= n; ++i) sum += 1.0 / (1.0 + i * kappa - a);
        return sum - target;
    };
    // Increasing in alpha on (-inf, top); positive near top, negative at 0
    // because target exceeds sum 1/(1 + i kappa).
    double lo = 0.0;
    double hi = top * (1.0 - 1e-15);
    if (!(excess(lo) < 0.0)) throw EstimatorError("c1: no root (c0 too large)");
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(excess, lo, hi, tol, iters);
    const double alpha = 0.5 * (bracket.first + bracket.second);
    double log_prod = 0.0;
    for (int i = 1; i <= n; ++i) {
        log_prod += std::log((1.0 + i * kappa) / (1.0 + i * kappa - alpha));
    }
    return {std::exp(alpha * std::log(c0) + log_prod / n), alpha};
}

double grunbaum_lower(double s) {
    if (!(s > -1.0)) throw ParameterError("s", "must exceed -1");
    if (s == 0.0) return std::exp(-1.0);
    return std::exp(-std::log1p(s) / s);
}

double varentropy_bound(int n, double kappa) {
    require_dim(n);
    if (!(kappa > -1.0 / n)) throw ParameterError("kappa", "must exceed -1/n");
    if (kappa == kInf) return 0.0;
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double d = 1.0 + i * kappa;
        sum += 1.0 / (d * d);
    }
    return sum;
}

double large_dev_lower(int n, double s) {
    require_dim(n);
    return 1.0 - std::pow(const_c1_bound(s), n);
}

BoundResult tail_bound_deviation(double u, int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    if (!(u > 0.0)) throw ParameterError("u", "must be positive");
    BoundResult r = make_result("tail-deviation", {{"u", u}, {"n", n}, {"s", s}});
    r.constant_name = "c_dev";
    flag(r, s > -0.5 && s < 0.0, "s must lie in (-1/2, 0)");
    const double c = cfg.constant("c_dev");
    const double a = std::abs(s);
    if (a == 0.0) {
        r.value = kNaN;
        return r;
    }
    r.constant_power = 1.0 / (2.0 * a);
    r.value = std::pow(c * std::max(std::sqrt(double(n)), 1.0 / a) / u, 1.0 / (2.0 * a));
    r.vacuous = r.value > 1.0;
    const double rn = std::sqrt(double(n));
    if (s >= -1.0 / (2.0 * rn) && 6.0 * c * rn <= u && u <= 3.0 * c / a) {
        r.secondary_value = std::exp(-cfg.constant("c_dev_exp") * u);
    }
    return r;
}

BoundResult max_density_bound(int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    BoundResult r = make_result("max-density", {{"n", n}, {"s", s}});
    flag(r, s > -0.5 && s < 0.0, "s must lie in (-1/2, 0)");
    if (!r.in_validity_domain) {
        r.value = s > -0.5 ? kNaN : kInf;
        return r;
    }
    if (n == 1) {
        r.value = 1.0 / (1.0 + 2.0 * s);
        return r;
    }
    r.constant_name = "c_maxdens";
    r.constant_power = n * (1.0 + n * std::abs(s));
    r.value = std::pow(cfg.constant("c_maxdens"), r.constant_power) * std::pow(const_d0(n, s), n) *
              std::pow(double(n), 0.5 * n);
    return r;
}

BoundResult smoothing_l1_bound(double t, int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    if (!(t > 0.0)) throw ParameterError("t", "must be positive");
    BoundResult r = make_result("smoothing-l1", {{"t", t}, {"n", n}, {"s", s}});
    flag(r, s > -0.5 && s < 0.0, "s must lie in (-1/2, 0)");
    if (!r.in_validity_domain) {
        r.value = kNaN;
        return r;
    }
    r.constant_name = "c_regul";
    r.constant_power = 1.0 + n * std::abs(s);
    r.value = std::pow(cfg.constant("c_regul"), r.constant_power) * const_d0(n, s) * t * n;
    r.vacuous = r.value > 2.0;
    return r;
}

// ---------------------------------------------------------------------------
// theorems

BoundResult thm_tv_from_bl(double d_bl, int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    require_distance("d_bl", d_bl);
    BoundResult r = make_result("thm-tv-bl", {{"d_bl", d_bl}, {"n", n}, {"s", s}});
    flag(r, s > -0.5 && s < 0.0, "s must lie in (-1/2, 0)");
    flag(r, d_bl <= 2.0, "d_bl must lie in [0, 2]");
    r.constant_name = "c_tvbl";
    const double a = 1.0 + n * std::abs(s);
    r.constant_power = a;
    if (!(1.0 + 2.0 * s > 0.0)) {
        r.value = kNaN;
        return r;
    }
    r.value = std::pow(cfg.constant("c_tvbl"), a) * std::pow(a, 2.0 * a) / std::sqrt(1.0 + 2.0 * s) *
              std::sqrt(double(n)) * std::sqrt(d_bl);
    r.vacuous = r.value > 2.0;
    return r;
}

BoundResult thm_w1_from_bl(double d_bl, int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    require_distance("d_bl", d_bl);
    BoundResult r = make_result("thm-compar-bl", {{"d_bl", d_bl}, {"n", n}, {"s", s}});
    flag(r, s > -0.5 && s < 0.0, "s must lie in (-1/2, 0)");
    flag(r, d_bl <= 2.0, "d_bl must lie in [0, 2]");
    r.constant_name = "c_w1bl";
    r.constant_power = 1.0;
    const double a = std::abs(s);
    if (a == 0.0) {
        r.value = kNaN;
        return r;
    }
    const double rn = std::sqrt(double(n));
    const double e = 1.0 / (1.0 + 4.0 * a);
    r.value = cfg.constant("c_w1bl") * rn * std::pow(std::max(1.0, 1.0 / (rn * a)), e) * std::pow(d_bl, e);
    // Isotropic laws have E|X| <= sqrt(n), so W1 <= 2 sqrt(n) always.
    r.vacuous = r.value > 2.0 * rn;
    return r;
}

BoundResult thm_wq_from_wp(double w_p, double p, double q, int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    require_distance("w_p", w_p);
    if (!(p >= 1.0 && q > p)) throw ParameterError("q", "orders must satisfy 1 <= p < q");
    cfg.validate();
    BoundResult r = make_result("thm-compar-wass", {{"w_p", w_p}, {"p", p}, {"q", q}, {"n", n}, {"s", s},
                                                    {"alpha", cfg.alpha}});
    const double aq = cfg.alpha * q;
    flag(r, s > -1.0 / aq && s < 0.0, "s must lie in (-1/(alpha q), 0)");
    r.constant_name = "c_wqwp";
    r.constant_power = 1.0;
    if (!r.in_validity_domain) {
        r.value = kNaN;
        return r;
    }
    const double a = std::abs(s);
    const double ap = cfg.alpha_conjugate();
    const double m = 2.0 * a * ap * (q - p);
    const double rn = std::sqrt(double(n));
    r.value = cfg.constant("c_wqwp") * std::pow(const_C(aq, s) * rn, m / (1.0 + m)) *
              std::pow(std::max(rn, 1.0 / a), (q - p) / (q * (1.0 + m))) *
              std::pow(w_p, (p / q) / (1.0 + m));
    return r;
}

BoundResult thm_kl_from_tv(double d_tv, int n, double s, const BoundConfig& cfg) {
    require_dim(n);
    require_distance("d_tv", d_tv);
    cfg.validate();
    BoundResult r = make_result("thm-compar-rel-ent", {{"d_tv", d_tv}, {"n", n}, {"s", s}, {"alpha", cfg.alpha}});
    flag(r, s > -1.0 / (2.0 * cfg.alpha) && s < 0.0, "s must lie in (-1/(2 alpha), 0)");
    flag(r, d_tv <= 2.0, "d_tv must lie in [0, 2]");
    r.constant_name = "c_kl";
    r.constant_power = 1.0;
    const double a = std::abs(s);
    const double base = 1.0 - 2.0 * cfg.alpha * a;
    if (a == 0.0 || !(base > 0.0)) {
        r.value = kNaN;
        return r;
    }
    const double ap = cfg.alpha_conjugate();
    const double rn = std::sqrt(double(n));
    const double e = 1.0 / (1.0 + 4.0 * a * ap);
    const double prefactor = cfg.constant("c_kl") * n * (1.0 + n * a) * std::log(ap * n) /
                             std::pow(base, 4.0 * a * (ap - 1.0) * e);
    r.value = prefactor * std::pow(std::max(1.0, 1.0 / (rn * a)), 2.0 * e) * (std::pow(d_tv, e) + d_tv);
    return r;
}

BoundResult thm_tsallis_from_tv(double d_tv, int n, double s, double p, double M, const BoundConfig& cfg) {
    require_dim(n);
    require_distance("d_tv", d_tv);
    if (!(p > 1.0)) throw ParameterError("p", "Tsallis order must exceed 1");
    if (!(M > 0.0)) throw ParameterError("M", "moment must be positive");
    cfg.validate();
    BoundResult r = make_result("thm-compar-tsal", {{"d_tv", d_tv}, {"n", n}, {"s", s}, {"p", p}, {"M", M},
                                                    {"alpha", cfg.alpha}});
    flag(r, s > -0.5 && s < 0.0, "s must lie in (-1/2, 0)");
    flag(r, d_tv <= 2.0, "d_tv must lie in [0, 2]");
    r.constant_name = "c_tsallis";
    if (!r.in_validity_domain) {
        r.value = kNaN;
        return r;
    }
    if (M == kInf) {
        r.value = kInf;
        return r;
    }
    if (d_tv == 0.0) {
        r.value = 0.0;
        return r;
    }
    const double c = cfg.constant("c_tsallis");
    const double a = std::abs(s);
    const double ap = cfg.alpha_conjugate();
    const double lead =
        std::pow(std::pow(c, n * (1.0 + n * a)) * std::pow(const_d0(n, s), n) * std::pow(double(n), 0.5 * n),
                 p - 1.0) /
        (p - 1.0);
    const double inner = c * std::sqrt(p - 1.0) * std::max(std::sqrt(double(n)), 1.0 / a) /
                         std::sqrt(std::log1p(1.0 / d_tv));
    const double tail = std::pow(M, 1.0 / cfg.alpha) * std::pow(inner, 1.0 / (2.0 * a * ap));
    r.value = lead * (std::sqrt(d_tv + d_tv * d_tv) + tail);
    return r;
}

// ---------------------------------------------------------------------------
// known inequalities

double pinsker_gilardoni_slack(double d_tv, double renyi, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
    require_distance("d_tv", d_tv);
    return renyi - 0.5 * p * d_tv * d_tv;
}

double talagrand_slack(double w2, double kl) {
    require_distance("w2", w2);
    return 2.0 * kl - w2 * w2;
}

double renyi_interval_coeff(double p, double q) {
    if (!(p > 0.0 && p < q && q < 1.0)) throw ParameterError("q", "orders must satisfy 0 < p < q < 1");
    return p * (1.0 - q) / (q * (1.0 - p));
}

double renyi_interval_strong_coeff(double p, double q) {
    if (!(p > 0.0 && p < q && q < 1.0)) throw ParameterError("q", "orders must satisfy 0 < p < q < 1");
    return p * (1.0 - q) / ((1.0 - p) * (1.0 - p));
}

IntervalSlack renyi_interval_slack(double renyi_p, double renyi_q, double p, double q) {
    return {renyi_p - renyi_interval_coeff(p, q) * renyi_q, renyi_p - renyi_interval_strong_coeff(p, q) * renyi_q,
            renyi_q - renyi_p};
}

double bl_cap_slack(double d_bl, double d_tv, double w1) {
    return std::min(d_tv, w1) - d_bl;
}

}  // namespace convexmetrics
