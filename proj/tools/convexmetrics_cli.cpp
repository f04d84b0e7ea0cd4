// Command-line front end: dist, bound, verify, fit.
//
// Exit codes: 0 all checks hold, 1 at least one violated verdict,
// 2 configuration or input error.

#include "convexmetrics/bounds.hpp"
#include "convexmetrics/distances.hpp"
#include "convexmetrics/error.hpp"
#include "convexmetrics/harness.hpp"
#include "convexmetrics/serialization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace cm = convexmetrics;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

// Inline JSON, or a path to a JSON file.
json read_json_arg(const std::string& arg) {
    try {
        if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) return json::parse(arg);
        std::ifstream in(arg);
        if (!in) throw cm::ConfigError(arg + ": cannot open");
        return json::parse(in);
    } catch (const json::exception& e) {
        throw cm::ConfigError(arg + ": " + e.what());
    }
}

cm::EmpiricalMeasure read_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cm::ConfigError(path + ": cannot open");
    return cm::read_empirical_csv(in);
}

void write_text(const std::string& text, const std::optional<std::string>& path) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw cm::ConfigError(*path + ": cannot open for writing");
    out << text;
}

// CONVEXMETRICS_SEED overrides the config seed; --seed overrides both.
void apply_overrides(cm::ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::size_t>& budget) {
    if (const char* env = std::getenv("CONVEXMETRICS_SEED"); env && *env) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw cm::ConfigError(std::string("CONVEXMETRICS_SEED: not an integer: ") + env);
        }
    }
    if (seed) cfg.seed = *seed;
    if (budget) {
        if (*budget < 2) throw cm::ConfigError("--budget must be at least 2");
        cfg.budget = *budget;
    }
}

struct DistArgs {
    std::string mu;
    std::string nu;
    std::string cloud_a;
    std::string cloud_b;
    std::string distance = "tv";
    double p = 1.0;
    std::string solver = "exact";
    double reg = 0.01;
    std::size_t budget = 200000;
    std::optional<std::uint64_t> seed;
    std::size_t sample_size = 300;
    bool isotropize = false;
};

int run_dist(const DistArgs& a, const std::optional<std::string>& out) {
    std::uint64_t seed = 1;
    if (const char* env = std::getenv("CONVEXMETRICS_SEED"); env && *env) seed = std::stoull(env);
    if (a.seed) seed = *a.seed;

    cm::DistanceEstimate e;
    const bool clouds = !a.cloud_a.empty() || !a.cloud_b.empty();
    if (clouds) {
        if (a.cloud_a.empty() || a.cloud_b.empty()) throw cm::ConfigError("dist: need both --cloud-a and --cloud-b");
        const auto ca = read_cloud(a.cloud_a);
        const auto cb = read_cloud(a.cloud_b);
        if (a.distance == "tv") {
            e = cm::tv_distance_empirical(ca, cb);
        } else if (a.distance == "bl") {
            e = cm::bl_distance_empirical(ca, cb);
        } else if (a.distance == "wasserstein") {
            cm::SinkhornOptions opts;
            opts.reg = a.reg;
            e = cm::wasserstein_empirical(ca, cb, a.p,
                                          a.solver == "sinkhorn" ? cm::OtSolver::Sinkhorn : cm::OtSolver::Exact, opts);
        } else {
            throw cm::ConfigError("dist: '" + a.distance + "' is not available for empirical clouds");
        }
    } else {
        if (a.mu.empty() || a.nu.empty()) throw cm::ConfigError("dist: need --mu and --nu (or two clouds)");
        cm::DistributionSpec mu = cm::spec_from_json(read_json_arg(a.mu));
        cm::DistributionSpec nu = cm::spec_from_json(read_json_arg(a.nu));
        if (a.isotropize) {
            mu = cm::isotropize(mu);
            nu = cm::isotropize(nu);
        }
        if (a.distance == "tv") {
            e = cm::tv_distance(mu, nu, a.budget, seed);
        } else if (a.distance == "bl") {
            e = cm::bl_distance(mu, nu, a.sample_size, seed);
        } else if (a.distance == "wasserstein") {
            if (mu.dim() != 1) throw cm::ConfigError("dist: spec-level wasserstein is 1D; sample clouds for nD");
            e = cm::wasserstein_1d(mu, nu, a.p);
        } else if (a.distance == "renyi") {
            e = cm::renyi_divergence(mu, nu, a.p, a.budget, seed);
        } else if (a.distance == "kl") {
            e = cm::kl_divergence(mu, nu, a.budget, seed);
        } else if (a.distance == "tsallis") {
            e = cm::tsallis_divergence(mu, nu, a.p, a.budget, seed);
        } else {
            throw cm::ConfigError("dist: unknown distance '" + a.distance + "'");
        }
    }
    write_text(cm::estimate_to_json(e).dump(2) + "\n", out);
    return kExitOk;
}

struct BoundArgs {
    std::string formula;
    int n = 1;
    double s = 0.0;
    double value = 0.0;
    double p = 1.0;
    double q = 2.0;
    double moment = std::numeric_limits<double>::infinity();
    std::optional<std::string> config;
};

int run_bound(const BoundArgs& a, const std::optional<std::string>& out) {
    cm::BoundConfig bc;
    if (a.config) {
        const json doc = read_json_arg(*a.config);
        bc = cm::bound_config_from_json(doc.contains("bounds") ? doc.at("bounds") : doc);
    }
    const std::string& f = a.formula;
    json result;
    if (f == "tail-deviation") {
        result = cm::bound_result_to_json(cm::tail_bound_deviation(a.value, a.n, a.s, bc));
    } else if (f == "max-density") {
        result = cm::bound_result_to_json(cm::max_density_bound(a.n, a.s, bc));
    } else if (f == "smoothing-l1") {
        result = cm::bound_result_to_json(cm::smoothing_l1_bound(a.value, a.n, a.s, bc));
    } else if (f == "thm-tv-bl") {
        result = cm::bound_result_to_json(cm::thm_tv_from_bl(a.value, a.n, a.s, bc));
    } else if (f == "thm-compar-bl") {
        result = cm::bound_result_to_json(cm::thm_w1_from_bl(a.value, a.n, a.s, bc));
    } else if (f == "thm-compar-wass") {
        result = cm::bound_result_to_json(cm::thm_wq_from_wp(a.value, a.p, a.q, a.n, a.s, bc));
    } else if (f == "thm-compar-rel-ent") {
        result = cm::bound_result_to_json(cm::thm_kl_from_tv(a.value, a.n, a.s, bc));
    } else if (f == "thm-compar-tsal") {
        result = cm::bound_result_to_json(cm::thm_tsallis_from_tv(a.value, a.n, a.s, a.p, a.moment, bc));
    } else if (f == "minimize") {
        throw cm::ConfigError("bound: use the library call for minimize_lemma");
    } else {
        const auto scalar = [&](const std::string& id, double v) {
            return json{{"formula_id", id}, {"value", cm::number_or_null(v)}};
        };
        if (f == "const-C") {
            result = scalar(f, cm::const_C(a.p, a.s));
        } else if (f == "const-d0") {
            result = scalar(f, cm::const_d0(a.n, a.s));
        } else if (f == "const-c0") {
            result = scalar(f, cm::const_c0(a.n, a.s));
        } else if (f == "const-c1-bound") {
            result = scalar(f, cm::const_c1_bound(a.s));
        } else if (f == "const-c2") {
            result = scalar(f, cm::const_c2(a.s));
        } else if (f == "grunbaum") {
            result = scalar(f, cm::grunbaum_lower(a.s));
        } else if (f == "varentropy") {
            result = scalar(f, cm::varentropy_bound(a.n, cm::kappa_from_s(a.s, a.n)));
        } else if (f == "large-dev") {
            result = scalar(f, cm::large_dev_lower(a.n, a.s));
        } else {
            throw cm::ConfigError("bound: unknown formula '" + f + "'");
        }
    }
    write_text(result.dump(2) + "\n", out);
    return kExitOk;
}

struct SuiteArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> budget;
    std::optional<std::string> format;
    bool fit = false;
};

int run_verify(const SuiteArgs& a, std::optional<std::string> out) {
    cm::ExperimentConfig cfg = cm::load_config(a.config);
    apply_overrides(cfg, a.seed, a.budget);
    const std::string format = a.format.value_or(cfg.output_format);
    if (format != "csv" && format != "json") throw cm::ConfigError("--format must be csv or json");
    if (!out && cfg.output_path) out = cfg.output_path->string();

    const auto rows = cm::run_suite(cfg);
    if (out) {
        cm::emit(rows, format, *out);
    } else if (format == "csv") {
        cm::write_csv(rows, std::cout);
    } else {
        std::cout << cm::rows_to_json(rows).dump(2) << '\n';
    }
    if (a.fit) std::cerr << cm::fitted_to_json(cm::fit_constants(rows)).dump(2) << '\n';

    std::size_t violated = 0;
    for (const auto& r : rows) {
        if (r.verdict == cm::Verdict::Violated) {
            ++violated;
            std::cerr << "violated: " << r.pair_id << ' ' << r.quantity << " lhs=" << r.lhs << " rhs=" << r.rhs
                      << '\n';
        }
    }
    std::cerr << rows.size() << " rows, " << violated << " violated\n";
    return violated > 0 ? kExitViolation : kExitOk;
}

int run_fit(const SuiteArgs& a, const std::optional<std::string>& out) {
    cm::ExperimentConfig cfg = cm::load_config(a.config);
    apply_overrides(cfg, a.seed, a.budget);
    // Fitting needs every theorem row, whatever the config's check filter.
    const auto rows = cm::run_suite(cfg);
    write_text(cm::fitted_to_json(cm::fit_constants(rows)).dump(2) + "\n", out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distances, comparison bounds and verification for s-concave measures.\n"
                 "Total variation uses the L1 convention (range [0, 2])."};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::string> out;
    app.add_option("--out", out, "Write output to PATH instead of stdout");

    DistArgs dist;
    auto* dist_cmd = app.add_subcommand("dist", "One distance between one pair");
    dist_cmd->add_option("--mu", dist.mu, "First measure: inline JSON spec or path to one");
    dist_cmd->add_option("--nu", dist.nu, "Second measure: inline JSON spec or path to one");
    dist_cmd->add_option("--cloud-a", dist.cloud_a, "First empirical cloud (CSV)");
    dist_cmd->add_option("--cloud-b", dist.cloud_b, "Second empirical cloud (CSV)");
    dist_cmd->add_option("--distance", dist.distance, "tv | bl | wasserstein | renyi | kl | tsallis")
        ->check(CLI::IsMember({"tv", "bl", "wasserstein", "renyi", "kl", "tsallis"}));
    dist_cmd->add_option("--p", dist.p, "Order for wasserstein, renyi, tsallis");
    dist_cmd->add_option("--solver", dist.solver, "exact | sinkhorn (empirical wasserstein)")
        ->check(CLI::IsMember({"exact", "sinkhorn"}));
    dist_cmd->add_option("--reg", dist.reg, "Sinkhorn entropic regularization");
    dist_cmd->add_option("--budget", dist.budget, "Monte-Carlo draws");
    dist_cmd->add_option("--seed", dist.seed, "Random seed");
    dist_cmd->add_option("--sample-size", dist.sample_size, "Cloud size for spec-level d_BL");
    dist_cmd->add_flag("--isotropize", dist.isotropize, "Isotropize both measures first");

    BoundArgs bound;
    auto* bound_cmd = app.add_subcommand("bound", "Evaluate one bound formula");
    bound_cmd->add_option("--formula", bound.formula, "Formula id")->required();
    bound_cmd->add_option("--n", bound.n, "Dimension");
    bound_cmd->add_option("--s", bound.s, "Convexity parameter s");
    bound_cmd->add_option("--value", bound.value, "Input distance, level u or scale t");
    bound_cmd->add_option("--p", bound.p, "Order p");
    bound_cmd->add_option("--q", bound.q, "Order q");
    bound_cmd->add_option("--moment", bound.moment, "Gaussian moment M for thm-compar-tsal");
    bound_cmd->add_option("--config", bound.config, "JSON with a 'bounds' block (constants, alpha)");

    SuiteArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Run the full check suite from a config");
    verify_cmd->add_option("--config", verify.config, "JSON or TOML config")->required();
    verify_cmd->add_option("--seed", verify.seed, "Override the config seed");
    verify_cmd->add_option("--budget", verify.budget, "Override the Monte-Carlo budget");
    verify_cmd->add_option("--format", verify.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    verify_cmd->add_flag("--fit-constants", verify.fit, "Also print fitted constants to stderr");

    SuiteArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the minimal universal constants on a config grid");
    fit_cmd->add_option("--config", fit.config, "JSON or TOML config")->required();
    fit_cmd->add_option("--seed", fit.seed, "Override the config seed");
    fit_cmd->add_option("--budget", fit.budget, "Override the Monte-Carlo budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*dist_cmd) return run_dist(dist, out);
        if (*bound_cmd) return run_bound(bound, out);
        if (*verify_cmd) return run_verify(verify, out);
        if (*fit_cmd) return run_fit(fit, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
