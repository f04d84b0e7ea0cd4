#include "convexmetrics/harness.hpp"

#include "convexmetrics/distances.hpp"
#include "convexmetrics/error.hpp"
#include "convexmetrics/serialization.hpp"

#include <toml.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace convexmetrics {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.12g", x);
    return buf.data();
}

std::string fmt_order(double p) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%g", p);
    return buf.data();
}

bool is_standard_gaussian(const DistributionSpec& spec) {
    if (spec.family() != Family::Gaussian && spec.family() != Family::StdGaussian) return false;
    const int n = spec.dim();
    const Eigen::MatrixXd cov = spec.effective_scale() * spec.effective_scale().transpose();
    return spec.effective_shift().norm() < 1e-12 && (cov - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-12;
}

Verdict decide(double lhs, double rhs, bool valid, bool vacuous, double se, double tol) {
    if (!valid || std::isnan(lhs) || std::isnan(rhs)) return Verdict::InvalidDomain;
    if (std::isinf(lhs)) return std::isinf(rhs) ? Verdict::Infinite : Verdict::Violated;
    if (std::isinf(rhs)) return vacuous ? Verdict::HoldsVacuous : Verdict::Holds;
    if (rhs - lhs >= -(tol + 3.0 * se)) return vacuous ? Verdict::HoldsVacuous : Verdict::Holds;
    return Verdict::Violated;
}

// Per-pair accumulator of rows.
class RowSink {
public:
    RowSink(std::string pair_id, double tol) : pair_id_(std::move(pair_id)), tol_(tol) {}

    // Measurement with an optional cap (rhs = +inf for none).
    void measure(const std::string& quantity, const DistanceEstimate& e, double cap) {
        ReportRow r = base(quantity, e.value, cap, e.method);
        r.std_error = e.std_error;
        r.verdict = decide(r.lhs, r.rhs, true, false, e.std_error.value_or(0.0), tol_);
        rows.push_back(std::move(r));
    }

    void inequality(const std::string& quantity, double lhs, double rhs, const std::string& method,
                    std::optional<double> se = std::nullopt) {
        ReportRow r = base(quantity, lhs, rhs, method);
        r.std_error = se;
        r.verdict = decide(lhs, rhs, true, false, se.value_or(0.0), tol_);
        rows.push_back(std::move(r));
    }

    // lhs <= bound.value, with the constant bookkeeping for fitting.
    void bound(const std::string& quantity, double lhs, const BoundResult& b, const BoundConfig& cfg,
               const std::string& method, std::optional<double> se = std::nullopt) {
        ReportRow r = base(quantity, lhs, b.value, method);
        r.std_error = se;
        r.verdict = decide(lhs, b.value, b.in_validity_domain, b.vacuous, se.value_or(0.0), tol_);
        r.constant_name = b.constant_name;
        r.constant_power = b.constant_power;
        if (!b.constant_name.empty() && b.constant_power > 0.0) {
            r.rhs_unit_constant = b.value / std::pow(cfg.constant(b.constant_name), b.constant_power);
        }
        rows.push_back(std::move(r));
    }

    std::vector<ReportRow> rows;

private:
    ReportRow base(const std::string& quantity, double lhs, double rhs, const std::string& method) const {
        ReportRow r;
        r.pair_id = pair_id_;
        r.quantity = quantity;
        r.lhs = lhs;
        r.rhs = rhs;
        r.slack = rhs - lhs;
        r.method = method;
        return r;
    }

    std::string pair_id_;
    double tol_;
};

double combine_se(std::initializer_list<std::optional<double>> parts) {
    double sq = 0.0;
    for (const auto& p : parts) {
        if (p) sq += *p * *p;
    }
    return std::sqrt(sq);
}

bool any_se(std::initializer_list<std::optional<double>> parts) {
    return std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.has_value(); });
}

std::optional<double> maybe_se(std::initializer_list<std::optional<double>> parts) {
    if (!any_se(parts)) return std::nullopt;
    return combine_se(parts);
}

// Standard error of a bound evaluated at a noisy distance d (one-sided
// difference over one standard error).
std::optional<double> propagated_se(const std::function<double(double)>& bound, double d,
                                    std::optional<double> se) {
    if (!se || *se == 0.0) return se;
    const double hi = bound(d + *se);
    const double mid = bound(d);
    if (!std::isfinite(hi) || !std::isfinite(mid)) return se;
    return std::abs(hi - mid);
}

// Sample-based W_p for nD pairs, with the same-law noise floor as std_error.
DistanceEstimate sampled_wasserstein(const DistributionSpec& mu, const DistributionSpec& nu, double p,
                                     std::size_t m, std::uint64_t seed) {
    const EmpiricalMeasure a = sample(mu, mix_seed(seed, 10), m);
    const EmpiricalMeasure b = sample(nu, mix_seed(seed, 11), m);
    const double floor_mu = exact_ot_cost(a, sample(mu, mix_seed(seed, 12), m), p).distance();
    const double floor_nu = exact_ot_cost(b, sample(nu, mix_seed(seed, 13), m), p).distance();
    DistanceEstimate e;
    e.name = "wasserstein";
    e.p = p;
    e.method = "exact-ot-sample";
    e.value = exact_ot_cost(a, b, p).distance();
    e.std_error = 0.5 * (floor_mu + floor_nu);
    return e;
}

void run_pair(const ExperimentConfig& cfg, const PairConfig& pair, std::uint64_t seed, RowSink& sink) {
    const DistributionSpec& mu = pair.mu;
    const DistributionSpec& nu = pair.nu;
    const int n = mu.dim();
    const bool one_d = n == 1;
    const double s = pair.s.value_or(std::min(mu.convexity().s, nu.convexity().s));
    const BoundConfig& bc = cfg.bounds;
    const bool gaussian_ref = is_standard_gaussian(nu);

    // Distances, computed once and shared by every check that needs them.
    const DistanceEstimate tv = tv_distance(mu, nu, cfg.budget, mix_seed(seed, 1));
    std::optional<DistanceEstimate> bl;
    const auto need_bl = cfg.enabled("bl") || cfg.enabled("bl-cap") || cfg.enabled("thm-tv-bl") ||
                         cfg.enabled("thm-compar-bl");
    if (need_bl) bl = bl_distance(mu, nu, cfg.bl_sample_size, mix_seed(seed, 2));

    std::vector<double> w_orders = cfg.wasserstein_orders;
    for (double extra : {1.0, 2.0}) {
        if (std::find(w_orders.begin(), w_orders.end(), extra) == w_orders.end()) w_orders.push_back(extra);
    }
    std::sort(w_orders.begin(), w_orders.end());
    std::map<double, DistanceEstimate> w;
    for (double p : w_orders) {
        w[p] = one_d ? wasserstein_1d(mu, nu, p)
                     : sampled_wasserstein(mu, nu, p, cfg.bl_sample_size, mix_seed(seed, 3));
    }
    std::vector<double> r_orders = cfg.renyi_orders;
    std::sort(r_orders.begin(), r_orders.end());
    std::map<double, DistanceEstimate> d;
    std::map<double, DistanceEstimate> t;
    for (double p : r_orders) {
        d[p] = renyi_divergence(mu, nu, p, cfg.budget, mix_seed(seed, 4));
        if (p > 1.0) t[p] = tsallis_divergence(mu, nu, p, cfg.budget, mix_seed(seed, 4));
    }

    // --- distance rows
    if (cfg.enabled("tv")) sink.measure("tv", tv, 2.0);
    if (bl && cfg.enabled("bl")) sink.measure("bl", *bl, 2.0);
    if (cfg.enabled("wasserstein")) {
        for (double p : cfg.wasserstein_orders) sink.measure("wasserstein[p=" + fmt_order(p) + "]", w[p], kInf);
    }
    if (cfg.enabled("renyi")) {
        for (double p : r_orders) {
            sink.measure(p == 1.0 ? "kl" : "renyi[p=" + fmt_order(p) + "]", d[p], kInf);
        }
    }
    if (cfg.enabled("tsallis")) {
        for (const auto& [p, e] : t) sink.measure("tsallis[p=" + fmt_order(p) + "]", e, kInf);
    }

    // --- known inequalities
    if (bl && cfg.enabled("bl-cap")) {
        const DistanceEstimate& w1 = w[1.0];
        sink.inequality("bl-cap", bl->value, std::min(tv.value, w1.value), bl->method,
                        maybe_se({bl->std_error, tv.std_error, w1.std_error}));
    }
    if (cfg.enabled("pinsker-gilardoni")) {
        for (double p : r_orders) {
            if (p > 1.0) continue;
            const double lhs = 0.5 * p * tv.value * tv.value;
            std::optional<double> se_lhs;
            if (tv.std_error) se_lhs = p * tv.value * *tv.std_error;
            sink.inequality("pinsker-gilardoni[p=" + fmt_order(p) + "]", lhs, d[p].value, d[p].method,
                            maybe_se({se_lhs, d[p].std_error}));
        }
    }
    if (cfg.enabled("talagrand") && gaussian_ref && one_d && d.count(1.0)) {
        const double w2 = w[2.0].value;
        sink.inequality("talagrand", w2 * w2, 2.0 * d[1.0].value, "quadrature");
    }
    if (cfg.enabled("wasserstein-monotone")) {
        for (std::size_t k = 0; k + 1 < w_orders.size(); ++k) {
            const double p = w_orders[k];
            const double q = w_orders[k + 1];
            sink.inequality("wasserstein-monotone[" + fmt_order(p) + "<" + fmt_order(q) + "]", w[p].value,
                            w[q].value, w[p].method, maybe_se({w[p].std_error, w[q].std_error}));
        }
    }
    if (cfg.enabled("renyi-monotone")) {
        for (std::size_t k = 0; k + 1 < r_orders.size(); ++k) {
            const double p = r_orders[k];
            const double q = r_orders[k + 1];
            sink.inequality("renyi-monotone[" + fmt_order(p) + "<" + fmt_order(q) + "]", d[p].value, d[q].value,
                            d[p].method, maybe_se({d[p].std_error, d[q].std_error}));
        }
    }
    if (cfg.enabled("renyi-interval")) {
        for (std::size_t k = 0; k + 1 < r_orders.size(); ++k) {
            const double p = r_orders[k];
            const double q = r_orders[k + 1];
            if (!(q < 1.0)) continue;
            const double coeff = renyi_interval_coeff(p, q);
            std::optional<double> se_q;
            if (d[q].std_error) se_q = coeff * *d[q].std_error;
            sink.inequality("renyi-interval[" + fmt_order(p) + "<" + fmt_order(q) + "]", coeff * d[q].value,
                            d[p].value, d[p].method, maybe_se({se_q, d[p].std_error}));
        }
    }
    if (cfg.enabled("tsallis-dominates")) {
        for (const auto& [p, e] : t) {
            sink.inequality("tsallis-dominates[p=" + fmt_order(p) + "]", d[p].value, e.value, e.method,
                            maybe_se({d[p].std_error, e.std_error}));
        }
    }

    // --- comparison theorems
    if (bl && cfg.enabled("thm-tv-bl")) {
        const auto f = [&](double x) { return thm_tv_from_bl(std::min(x, 2.0), n, s, bc).value; };
        sink.bound("thm-tv-bl", tv.value, thm_tv_from_bl(bl->value, n, s, bc), bc, tv.method,
                   maybe_se({tv.std_error, propagated_se(f, bl->value, bl->std_error)}));
    }
    if (bl && cfg.enabled("thm-compar-bl")) {
        const auto f = [&](double x) { return thm_w1_from_bl(std::min(x, 2.0), n, s, bc).value; };
        sink.bound("thm-compar-bl", w[1.0].value, thm_w1_from_bl(bl->value, n, s, bc), bc, w[1.0].method,
                   maybe_se({w[1.0].std_error, propagated_se(f, bl->value, bl->std_error)}));
    }
    if (cfg.enabled("thm-compar-wass")) {
        const DistanceEstimate& w1 = w[1.0];
        const DistanceEstimate& w2 = w[2.0];
        if (w1.finite) {
            const auto f = [&](double x) { return thm_wq_from_wp(x, 1.0, 2.0, n, s, bc).value; };
            sink.bound("thm-compar-wass", w2.value, thm_wq_from_wp(w1.value, 1.0, 2.0, n, s, bc), bc, w2.method,
                       maybe_se({w2.std_error, propagated_se(f, w1.value, w1.std_error)}));
        }
    }
    if (gaussian_ref && cfg.enabled("thm-compar-rel-ent") && d.count(1.0)) {
        const auto f = [&](double x) { return thm_kl_from_tv(std::min(x, 2.0), n, s, bc).value; };
        sink.bound("thm-compar-rel-ent", d[1.0].value, thm_kl_from_tv(tv.value, n, s, bc), bc, d[1.0].method,
                   maybe_se({d[1.0].std_error, propagated_se(f, tv.value, tv.std_error)}));
    }
    if (gaussian_ref && cfg.enabled("thm-compar-tsal")) {
        for (const auto& [p, e] : t) {
            const ScalarEstimate moment = exp_quadratic_moment(mu, bc.alpha * (p - 1.0));
            const double M = moment.finite ? moment.value : kInf;
            sink.bound("thm-compar-tsal[p=" + fmt_order(p) + "]", e.value,
                       thm_tsallis_from_tv(tv.value, n, s, p, M, bc), bc, e.method, e.std_error);
        }
    }

    // --- single-measure lemmas, evaluated on mu
    const bool theorem_s = s > -0.5 && s < 0.0;
    if (cfg.enabled("max-density")) {
        const double fmax = one_d ? max_density_1d(mu) : mu.normalization();
        sink.bound("max-density", fmax, max_density_bound(n, s, bc), bc, one_d ? "golden-section" : "mode");
    }
    if (cfg.enabled("varentropy") && s * n < 1.0) {
        const double kappa = kappa_from_s(s, n);
        const ScalarEstimate v = varentropy(mu, cfg.budget, mix_seed(seed, 5));
        std::optional<double> se;
        if (v.monte_carlo) se = v.std_error;
        sink.inequality("varentropy", v.value, varentropy_bound(n, kappa), v.monte_carlo ? "monte-carlo" : "quadrature",
                        se);
    }
    if (cfg.enabled("max-entropy") && mu.has_finite_variance()) {
        const ScalarEstimate h = differential_entropy(mu, cfg.budget, mix_seed(seed, 6));
        const double logdet = std::log(mu.covariance().determinant());
        const double cap = 0.5 * n * std::log(2.0 * std::numbers::pi * std::numbers::e) + 0.5 * logdet;
        std::optional<double> se;
        if (h.monte_carlo) se = h.std_error;
        sink.inequality("max-entropy", h.value, cap, h.monte_carlo ? "monte-carlo" : "quadrature", se);
    }
    if (cfg.enabled("grunbaum") && one_d && mu.has_finite_mean() && s > -1.0) {
        const double above = 1.0 - mu.cdf_1d(mu.mean()[0]);
        sink.inequality("grunbaum", grunbaum_lower(s), above, "closed-form-cdf");
    }
    if (cfg.enabled("tail-deviation")) {
        for (double u : cfg.tail_levels) {
            double prob = 0.0;
            std::optional<double> se;
            std::string method;
            if (one_d) {
                prob = mu.cdf_1d(-u) + (1.0 - mu.cdf_1d(u));
                method = "closed-form-cdf";
            } else {
                const auto dim = static_cast<std::size_t>(n);
                const auto stats = kernels::monte_carlo(
                    mix_seed(seed, 7), cfg.budget,
                    [&](Rng& rng) {
                        std::array<double, 8> buf{};
                        mu.draw(rng, std::span<double>(buf.data(), dim));
                        double sq = 0.0;
                        for (std::size_t i = 0; i < dim; ++i) sq += buf[i] * buf[i];
                        return sq >= u * u ? 1.0 : 0.0;
                    },
                    Execution::Parallel);
                prob = stats.mean;
                se = stats.std_error();
                method = "monte-carlo";
            }
            sink.bound("tail-deviation[u=" + fmt_order(u) + "]", prob, tail_bound_deviation(u, n, s, bc), bc, method,
                       se);
        }
    }
    if (cfg.enabled("moment-norm") && mu.has_finite_variance()) {
        BoundResult b;
        b.formula_id = "const-C";
        b.constant_name = "c_norm";
        b.constant_power = 1.0;
        const ScalarEstimate m1 = abs_moment(mu, 1.0, cfg.budget, mix_seed(seed, 8));
        const ScalarEstimate m2 = abs_moment(mu, 2.0, cfg.budget, mix_seed(seed, 8));
        b.in_validity_domain = s > -0.5 && s < 0.0;
        b.value = b.in_validity_domain ? bc.constant("c_norm") * const_C(2.0, s) * m1.value
                                       : std::numeric_limits<double>::quiet_NaN();
        std::optional<double> se;
        if (m1.monte_carlo) se = combine_se({m1.std_error, m2.std_error});
        sink.bound("moment-norm[p=2]", std::sqrt(m2.value), b, bc, m1.monte_carlo ? "monte-carlo" : "quadrature",
                   se);
    }
    if (one_d && (cfg.enabled("smoothing-l1") || cfg.enabled("ledoux"))) {
        const double grad = grad_l1_norm_1d(mu);
        for (double ts : cfg.smoothing_scales) {
            const double gap = l1_distance_to_smoothed(mu, ts);
            const std::string tag = "[t=" + fmt_order(ts) + "]";
            if (cfg.enabled("smoothing-l1")) {
                sink.bound("smoothing-l1" + tag, gap, smoothing_l1_bound(ts, n, s, bc), bc, "quadrature");
            }
            if (cfg.enabled("ledoux")) sink.inequality("ledoux" + tag, gap, 2.0 * ts * grad, "quadrature");
        }
    }
    if (cfg.enabled("large-dev") && theorem_s) {
        const double fmax = one_d ? max_density_1d(mu) : mu.normalization();
        const double level = n * std::log(const_c0(n, s)) + std::log(fmax);
        const auto dim = static_cast<std::size_t>(n);
        const auto stats = kernels::monte_carlo(
            mix_seed(seed, 9), cfg.budget,
            [&](Rng& rng) {
                std::array<double, 8> buf{};
                const std::span<double> x(buf.data(), dim);
                mu.draw(rng, x);
                return mu.log_density(x) >= level ? 1.0 : 0.0;
            },
            Execution::Parallel);
        sink.inequality("large-dev", large_dev_lower(n, s), stats.mean, "monte-carlo", stats.std_error());
    }
    if (cfg.enabled("const-c1") && theorem_s) {
        const C1Exact c1 = const_c1_exact(n, s);
        const double kappa = kappa_from_s(s, n);
        BoundResult b;
        b.formula_id = "const-c1-bound";
        b.value = const_c1_bound(s);
        b.in_validity_domain = c1.alpha >= 0.5 * (1.0 + n * kappa);
        sink.bound("const-c1", c1.c1, b, bc, "root-finding");
    }
}

std::vector<double> orders_from(const json& doc, const char* key, std::vector<double> fallback, double lower,
                                bool inclusive) {
    if (!doc.contains(key)) return fallback;
    std::vector<double> out;
    try {
        out = doc.at(key).get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(key) + ": expected an array of numbers");
    }
    for (double v : out) {
        if (!(inclusive ? v >= lower : v > lower) || !std::isfinite(v)) {
            throw ConfigError(std::string(key) + ": value " + fmt_number(v) + " out of range");
        }
    }
    return out;
}

}  // namespace

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{
        "tv",          "bl",           "wasserstein",         "renyi",          "tsallis",
        "bl-cap",      "pinsker-gilardoni", "talagrand",      "wasserstein-monotone", "renyi-monotone",
        "renyi-interval", "tsallis-dominates", "thm-tv-bl",   "thm-compar-bl",  "thm-compar-wass",
        "thm-compar-rel-ent", "thm-compar-tsal", "max-density", "varentropy",   "max-entropy",
        "grunbaum",    "tail-deviation", "moment-norm",       "smoothing-l1",   "ledoux",
        "large-dev",   "const-c1"};
    return names;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::HoldsVacuous: return "holds-vacuous";
        case Verdict::Violated: return "violated";
        case Verdict::InvalidDomain: return "invalid-domain";
        case Verdict::Infinite: return "infinite";
    }
    return "unknown";
}

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    ExperimentConfig cfg;
    try {
        if (!doc.contains("seed")) throw ConfigError("config: 'seed' is required");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
        cfg.budget = doc.value("budget", cfg.budget);
        cfg.bl_sample_size = doc.value("bl_sample_size", cfg.bl_sample_size);
        cfg.tolerance = doc.value("tolerance", cfg.tolerance);
        if (!(cfg.tolerance > 0.0)) throw ConfigError("config: tolerance must be positive");
        if (cfg.budget < 2) throw ConfigError("config: budget must be at least 2");
        if (cfg.bl_sample_size < 2) throw ConfigError("config: bl_sample_size must be at least 2");
        cfg.wasserstein_orders = orders_from(doc, "wasserstein_orders", cfg.wasserstein_orders, 1.0, true);
        cfg.renyi_orders = orders_from(doc, "renyi_orders", cfg.renyi_orders, 0.0, false);
        cfg.smoothing_scales = orders_from(doc, "smoothing_scales", cfg.smoothing_scales, 0.0, false);
        cfg.tail_levels = orders_from(doc, "tail_levels", cfg.tail_levels, 0.0, false);
        if (doc.contains("checks")) {
            for (const auto& c : doc.at("checks")) {
                const auto name = c.get<std::string>();
                const auto& known = known_checks();
                if (std::find(known.begin(), known.end(), name) == known.end()) {
                    throw ConfigError("config: unknown check '" + name + "'");
                }
                cfg.checks.insert(name);
            }
        }
        if (doc.contains("bounds")) cfg.bounds = bound_config_from_json(doc.at("bounds"));
        if (doc.contains("output")) {
            const json& out = doc.at("output");
            if (out.contains("path")) cfg.output_path = out.at("path").get<std::string>();
            cfg.output_format = out.value("format", cfg.output_format);
            if (cfg.output_format != "csv" && cfg.output_format != "json") {
                throw ConfigError("config: output.format must be csv or json");
            }
        }
        const json pairs = doc.value("pairs", json::array());
        if (!pairs.is_array()) throw ConfigError("config: 'pairs' must be an array");
        std::set<std::string> ids;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const json& p = pairs[k];
            const std::string id = p.value("id", "pair" + std::to_string(k));
            if (!ids.insert(id).second) throw ConfigError("config: duplicate pair id '" + id + "'");
            if (!p.contains("mu") || !p.contains("nu")) throw ConfigError("pair " + id + ": needs mu and nu");
            DistributionSpec mu = spec_from_json(p.at("mu"));
            DistributionSpec nu = spec_from_json(p.at("nu"));
            if (mu.dim() != nu.dim()) throw ConfigError("pair " + id + ": dimension mismatch");
            if (mu.dim() > 8) throw ConfigError("pair " + id + ": dimension above 8 is not supported");
            if (p.value("isotropize", true)) {
                try {
                    mu = isotropize(mu);
                    nu = isotropize(nu);
                } catch (const PreconditionError& e) {
                    throw ConfigError("pair " + id + ": " + e.what());
                }
            }
            std::optional<double> s;
            if (p.contains("s")) s = p.at("s").get<double>();
            cfg.pairs.push_back(PairConfig{id, std::move(mu), std::move(nu), s});
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    json doc;
    if (ext == ".toml") {
        toml::parse_result parsed;
        try {
            parsed = toml::parse_file(path.string());
        } catch (const toml::parse_error& e) {
            throw ConfigError(path.string() + ": " + std::string(e.description()));
        }
        std::ostringstream os;
        os << toml::json_formatter{parsed};
        doc = json::parse(os.str());
    } else if (ext == ".json") {
        std::ifstream in(path);
        if (!in) throw ConfigError(path.string() + ": cannot open");
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    } else {
        throw ConfigError(path.string() + ": unknown config extension (use .json or .toml)");
    }
    try {
        return config_from_json(doc);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::vector<ReportRow> run_suite(const ExperimentConfig& config) {
    const auto count = config.pairs.size();
    std::vector<std::vector<ReportRow>> per_pair(count);
    std::vector<std::exception_ptr> errors(count);
    const auto body = [&](std::size_t k) {
        try {
            const PairConfig& pair = config.pairs[k];
            const std::uint64_t seed = pair.mu.fixed_seed.value_or(mix_seed(config.seed, k));
            RowSink sink(pair.id, config.tolerance);
            run_pair(config, pair, seed, sink);
            per_pair[k] = std::move(sink.rows);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<ReportRow> rows;
    for (auto& v : per_pair) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

bool any_violation(const std::vector<ReportRow>& rows) {
    return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.verdict == Verdict::Violated; });
}

double fit_constant(const std::vector<std::pair<double, double>>& rows) {
    if (rows.empty()) throw ParameterError("rows", "cannot fit a constant on an empty grid");
    double best = 0.0;
    for (const auto& [lhs, rhs] : rows) {
        if (!(rhs > 0.0)) throw ParameterError("rows", "rhs parts must be positive");
        best = std::max(best, lhs / rhs);
    }
    return best;
}

std::vector<FittedConstant> fit_constants(const std::vector<ReportRow>& rows) {
    std::map<std::string, std::vector<std::pair<double, double>>> grouped;
    for (const auto& r : rows) {
        if (r.constant_name.empty() || !(r.constant_power > 0.0)) continue;
        if (r.verdict == Verdict::InvalidDomain) continue;
        if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs_unit_constant) || !(r.rhs_unit_constant > 0.0)) continue;
        // lhs <= c^k R  <=>  lhs^(1/k) <= c R^(1/k)
        const double inv = 1.0 / r.constant_power;
        grouped[r.constant_name].emplace_back(std::pow(std::max(0.0, r.lhs), inv), std::pow(r.rhs_unit_constant, inv));
    }
    std::vector<FittedConstant> out;
    for (const auto& [name, data] : grouped) out.push_back({name, fit_constant(data), data.size()});
    return out;
}

void write_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << "pair_id,quantity,lhs,rhs,slack,verdict,method,std_error\n";
    for (const auto& r : rows) {
        out << r.pair_id << ',' << r.quantity << ',' << fmt_number(r.lhs) << ',' << fmt_number(r.rhs) << ','
            << fmt_number(r.slack) << ',' << verdict_name(r.verdict) << ',' << r.method << ','
            << (r.std_error ? fmt_number(*r.std_error) : "") << '\n';
    }
}

namespace {

void put_number(json& j, const char* key, double x) {
    j[key] = number_or_null(x);
    if (!std::isfinite(x)) j[std::string(key) + "_nonfinite"] = fmt_number(x);
}

double get_number(const json& j, const char* key) {
    const std::string flag = std::string(key) + "_nonfinite";
    if (j.contains(flag)) {
        const auto v = j.at(flag).get<std::string>();
        if (v == "inf") return kInf;
        if (v == "-inf") return -kInf;
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.at(key).get<double>();
}

Verdict parse_verdict(const std::string& s) {
    for (Verdict v : {Verdict::Holds, Verdict::HoldsVacuous, Verdict::Violated, Verdict::InvalidDomain,
                      Verdict::Infinite}) {
        if (verdict_name(v) == s) return v;
    }
    throw ConfigError("unknown verdict '" + s + "'");
}

}  // namespace

json rows_to_json(const std::vector<ReportRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json j;
        j["pair_id"] = r.pair_id;
        j["quantity"] = r.quantity;
        put_number(j, "lhs", r.lhs);
        put_number(j, "rhs", r.rhs);
        put_number(j, "slack", r.slack);
        j["verdict"] = verdict_name(r.verdict);
        j["method"] = r.method;
        j["std_error"] = r.std_error ? json(*r.std_error) : json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<ReportRow> rows_from_json(const json& doc) {
    std::vector<ReportRow> rows;
    for (const auto& j : doc) {
        ReportRow r;
        r.pair_id = j.at("pair_id").get<std::string>();
        r.quantity = j.at("quantity").get<std::string>();
        r.lhs = get_number(j, "lhs");
        r.rhs = get_number(j, "rhs");
        r.slack = get_number(j, "slack");
        r.verdict = parse_verdict(j.at("verdict").get<std::string>());
        r.method = j.at("method").get<std::string>();
        if (!j.at("std_error").is_null()) r.std_error = j.at("std_error").get<double>();
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit(const std::vector<ReportRow>& rows, const std::string& format, const std::filesystem::path& path) {
    if (format != "csv" && format != "json") throw ConfigError("unknown output format '" + format + "'");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string() + ": cannot open for writing");
    if (format == "csv") {
        write_csv(rows, out);
    } else {
        out << rows_to_json(rows).dump(2) << '\n';
    }
    if (!out) throw ConfigError(path.string() + ": write failed");
}

json fitted_to_json(const std::vector<FittedConstant>& fitted) {
    json j = json::object();
    for (const auto& f : fitted) j[f.name] = {{"value", f.value}, {"rows", f.rows}};
    return j;
}

}  // namespace convexmetrics
