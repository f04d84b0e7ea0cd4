#pragma once

// JSON forms of specs, estimates, bound results and bound configs.

#include "convexmetrics/bounds.hpp"
#include "convexmetrics/distances.hpp"
#include "convexmetrics/measures.hpp"

#include <json.hpp>

namespace convexmetrics {

// {family, params, affine: {shift, scale (rows)}, seed_policy: "derived" | integer}
nlohmann::json spec_to_json(const DistributionSpec& spec);
// Throws ConfigError on malformed documents or invalid parameters.
DistributionSpec spec_from_json(const nlohmann::json& doc);

// {name, p, value, std_error, finite, method}; infinite values are null.
nlohmann::json estimate_to_json(const DistanceEstimate& e);

nlohmann::json bound_result_to_json(const BoundResult& r);

// {alpha, constants: {name: value}}
nlohmann::json bound_config_to_json(const BoundConfig& cfg);
BoundConfig bound_config_from_json(const nlohmann::json& doc);

// Finite numbers as-is; infinities and NaN as null.
nlohmann::json number_or_null(double x);

}  // namespace convexmetrics
