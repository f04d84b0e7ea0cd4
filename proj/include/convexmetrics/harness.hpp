#pragma once

// Experiment runner: builds pairs from a config, measures distances, evaluates
// every bound on them and records one verdict row per check.

#include "convexmetrics/bounds.hpp"
#include "convexmetrics/measures.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace convexmetrics {

struct PairConfig {
    std::string id;
    DistributionSpec mu;
    DistributionSpec nu;
    // Convexity parameter used by the theorem rows; defaults to min(s_mu, s_nu).
    std::optional<double> s;
};

struct ExperimentConfig {
    std::vector<PairConfig> pairs;
    std::uint64_t seed = 1;
    std::size_t budget = 100000;      // Monte-Carlo draws per estimate
    std::size_t bl_sample_size = 300;  // points per cloud for spec-level d_BL
    double tolerance = 1e-6;           // absolute slack for deterministic rows
    std::vector<double> wasserstein_orders{1.0, 2.0};
    std::vector<double> renyi_orders{0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
    std::vector<double> smoothing_scales{0.05, 0.1, 0.2};
    std::vector<double> tail_levels{2.0, 5.0, 10.0};
    std::set<std::string> checks;  // empty = all
    BoundConfig bounds;
    std::optional<std::filesystem::path> output_path;
    std::string output_format = "csv";

    bool enabled(const std::string& check) const { return checks.empty() || checks.count(check) > 0; }
};

// Every check name understood by run_suite.
const std::vector<std::string>& known_checks();

// JSON or TOML by file extension; throws ConfigError on any problem,
// including specs that cannot be built or isotropized.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& doc);

enum class Verdict { Holds, HoldsVacuous, Violated, InvalidDomain, Infinite };
std::string verdict_name(Verdict v);

struct ReportRow {
    std::string pair_id;
    std::string quantity;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    Verdict verdict = Verdict::Holds;
    std::string method;
    std::optional<double> std_error;
    // Fitting data for theorem rows: name and power of the universal
    // constant in rhs, and rhs evaluated with that constant set to 1.
    std::string constant_name;
    double constant_power = 0.0;
    double rhs_unit_constant = 0.0;
};

std::vector<ReportRow> run_suite(const ExperimentConfig& config);

bool any_violation(const std::vector<ReportRow>& rows);

// max over rows of lhs / rhs_part. Throws ParameterError on empty input or a
// nonpositive rhs_part.
double fit_constant(const std::vector<std::pair<double, double>>& rows);

struct FittedConstant {
    std::string name;
    double value = 0.0;
    std::size_t rows = 0;
};
// Minimal value of each universal constant that makes every valid, finite
// row carrying it hold: max over rows of (lhs / rhs_unit)^(1 / power).
std::vector<FittedConstant> fit_constants(const std::vector<ReportRow>& rows);

void write_csv(const std::vector<ReportRow>& rows, std::ostream& out);
nlohmann::json rows_to_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_json(const nlohmann::json& doc);
// Writes to path in "csv" or "json"; ConfigError with the path on I/O failure.
void emit(const std::vector<ReportRow>& rows, const std::string& format, const std::filesystem::path& path);

nlohmann::json fitted_to_json(const std::vector<FittedConstant>& fitted);

}  // namespace convexmetrics
