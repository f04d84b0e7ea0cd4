#include "convexmetrics/serialization.hpp"

#include "convexmetrics/error.hpp"

#include <cmath>

namespace convexmetrics {

using nlohmann::json;

namespace {

std::vector<double> number_array(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(std::string(what) + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

// Accepts a nested row array or a flat row-major array of n*n entries.
std::vector<double> matrix_entries(const json& j, std::size_t n, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + ": expected a matrix");
    std::vector<double> out;
    if (!j.empty() && j.front().is_array()) {
        for (const auto& row : j) {
            const auto r = number_array(row, what);
            out.insert(out.end(), r.begin(), r.end());
        }
    } else {
        out = number_array(j, what);
    }
    if (out.size() != n * n) throw ConfigError(std::string(what) + ": expected an n x n matrix");
    return out;
}

json matrix_rows(const std::vector<double>& flat, std::size_t n) {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i * n),
                                           flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
    }
    return rows;
}

double number_field(const json& params, const char* key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params.at(key).is_number()) throw ConfigError(std::string("params.") + key + ": expected a number");
    return params.at(key).get<double>();
}

}  // namespace

json number_or_null(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

json spec_to_json(const DistributionSpec& spec) {
    const FamilyParams& p = spec.params();
    json params = json::object();
    switch (spec.family()) {
        case Family::StdGaussian:
            params["n"] = p.n;
            break;
        case Family::Gaussian:
            params["mean"] = p.mean;
            params["covariance"] = matrix_rows(p.covariance, static_cast<std::size_t>(p.n));
            break;
        case Family::CauchyType:
            params["n"] = p.n;
            params["beta"] = p.beta;
            params["scale"] = p.scale;
            break;
        case Family::ExponentialCentered:
            break;
        case Family::UniformInterval:
            params["a"] = p.a;
            params["b"] = p.b;
            break;
    }
    json doc;
    doc["family"] = std::string(family_name(spec.family()));
    doc["params"] = params;
    doc["affine"] = {{"shift", spec.user_affine().shift},
                     {"scale", matrix_rows(spec.user_affine().scale, static_cast<std::size_t>(spec.dim()))}};
    if (spec.fixed_seed) {
        doc["seed_policy"] = *spec.fixed_seed;
    } else {
        doc["seed_policy"] = "derived";
    }
    return doc;
}

DistributionSpec spec_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("family") || !doc.at("family").is_string()) {
        throw ConfigError("spec: missing string field 'family'");
    }
    const json params = doc.value("params", json::object());
    if (!params.is_object()) throw ConfigError("spec: 'params' must be an object");
    try {
        const Family family = parse_family(doc.at("family").get<std::string>());
        std::optional<DistributionSpec> spec;
        switch (family) {
            case Family::StdGaussian:
                spec = DistributionSpec::std_gaussian(static_cast<int>(number_field(params, "n", 1)));
                break;
            case Family::Gaussian: {
                if (!params.contains("mean")) throw ConfigError("spec: gaussian needs params.mean");
                const auto mean = number_array(params.at("mean"), "params.mean");
                std::vector<double> cov;
                if (params.contains("covariance")) {
                    cov = matrix_entries(params.at("covariance"), mean.size(), "params.covariance");
                } else {
                    cov = AffineMap::identity(static_cast<int>(mean.size())).scale;
                }
                spec = DistributionSpec::gaussian(mean, cov);
                break;
            }
            case Family::CauchyType:
                if (!params.contains("beta")) throw ConfigError("spec: cauchy-type needs params.beta");
                spec = DistributionSpec::cauchy_type(static_cast<int>(number_field(params, "n", 1)),
                                                     number_field(params, "beta", 0.0),
                                                     number_field(params, "scale", 1.0));
                break;
            case Family::ExponentialCentered:
                spec = DistributionSpec::exponential_centered();
                break;
            case Family::UniformInterval:
                spec = DistributionSpec::uniform_interval(number_field(params, "a", 0.0),
                                                          number_field(params, "b", 1.0));
                break;
        }
        if (doc.contains("affine")) {
            const json& aff = doc.at("affine");
            const auto n = static_cast<std::size_t>(spec->dim());
            AffineMap map = AffineMap::identity(spec->dim());
            if (aff.contains("shift")) map.shift = number_array(aff.at("shift"), "affine.shift");
            if (aff.contains("scale")) map.scale = matrix_entries(aff.at("scale"), n, "affine.scale");
            if (map.shift.size() != n) throw ConfigError("affine.shift: dimension mismatch");
            spec = spec->with_affine(map);
        }
        if (doc.contains("seed_policy")) {
            const json& sp = doc.at("seed_policy");
            if (sp.is_number_unsigned() || sp.is_number_integer()) {
                spec->fixed_seed = sp.get<std::uint64_t>();
            } else if (!(sp.is_string() && sp.get<std::string>() == "derived")) {
                throw ConfigError("seed_policy: expected \"derived\" or a nonnegative integer");
            }
        }
        return *spec;
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("spec: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("spec: ") + e.what());
    }
}

json estimate_to_json(const DistanceEstimate& e) {
    json j;
    j["name"] = e.name;
    j["p"] = e.p ? json(*e.p) : json(nullptr);
    j["value"] = number_or_null(e.value);
    j["std_error"] = e.std_error ? json(*e.std_error) : json(nullptr);
    j["finite"] = e.finite;
    j["method"] = e.method;
    return j;
}

json bound_result_to_json(const BoundResult& r) {
    json j;
    j["formula_id"] = r.formula_id;
    j["value"] = number_or_null(r.value);
    j["infinite"] = std::isinf(r.value);
    j["in_validity_domain"] = r.in_validity_domain;
    if (!r.in_validity_domain) j["violated_precondition"] = r.violated_precondition;
    j["vacuous"] = r.vacuous;
    if (!r.constant_name.empty()) {
        j["constant"] = r.constant_name;
        j["constant_power"] = r.constant_power;
    }
    json inputs = json::object();
    for (const auto& [k, v] : r.inputs_echo) inputs[k] = number_or_null(v);
    j["inputs"] = inputs;
    if (r.secondary_value) j["secondary_value"] = *r.secondary_value;
    return j;
}

json bound_config_to_json(const BoundConfig& cfg) {
    json constants = json::object();
    for (const auto& name : BoundConfig::constant_names()) constants[name] = cfg.constant(name);
    return {{"alpha", cfg.alpha}, {"constants", constants}};
}

BoundConfig bound_config_from_json(const json& doc) {
    BoundConfig cfg;
    if (doc.is_null()) return cfg;
    if (!doc.is_object()) throw ConfigError("bounds: expected an object");
    try {
        if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<double>();
        if (doc.contains("constants")) {
            for (const auto& [name, value] : doc.at("constants").items()) {
                cfg.set_constant(name, value.get<double>());
            }
        }
        cfg.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("bounds: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bounds: ") + e.what());
    }
    return cfg;
}

}  // namespace convexmetrics
