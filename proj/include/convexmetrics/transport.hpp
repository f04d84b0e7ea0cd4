#pragma once

// Discrete optimal transport between weighted point clouds.

#include "convexmetrics/empirical.hpp"
#include "convexmetrics/kernels.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace convexmetrics {

struct PlanEntry {
    std::size_t i;
    std::size_t j;
    double mass;
};

struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<PlanEntry> coupling;  // nonzero entries only
    double p = 1.0;
    double cost = 0.0;                // sum of mass * cost over the coupling
    double row_residual = 0.0;        // L1 distance of row sums to the source weights
    double col_residual = 0.0;        // same for columns
    bool converged = true;
    // max of |negative reduced cost| and |reduced cost on used arcs|; 0 for
    // the 1D monotone path, which is optimal by construction.
    double slackness_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
    std::string method;

    // cost^(1/p).
    double distance() const;
    std::vector<double> dense() const;
};

// Row, col, mass triples with a header.
void write_plan_csv(const TransportPlan& plan, std::ostream& out);

inline constexpr std::size_t kDefaultMaxEntries = 4'000'000;

// Exact optimal coupling for cost |x - y|^p. One-dimensional inputs use the
// monotone (sorted) coupling, which is optimal for p >= 1; everything else
// goes through the min-cost-flow solver. Throws ResourceError when
// rows * cols exceeds max_entries.
TransportPlan exact_ot_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                            std::size_t max_entries = kDefaultMaxEntries);

// Min-cost flow on an explicit row-major cost matrix (nonnegative entries).
TransportPlan exact_ot_from_cost(std::span<const double> cost, std::span<const double> a,
                                 std::span<const double> b);

struct SinkhornOptions {
    double reg = 0.01;      // entropic regularization, absolute (cost units)
    int max_iter = 3000;    // total iterations over all annealing stages
    double tol = 1e-7;      // target L1 row-marginal residual
    Execution exec = Execution::Parallel;
};

// Log-domain Sinkhorn with epsilon annealing down to opts.reg. Reports
// converged = false (not an exception) when max_iter runs out.
TransportPlan sinkhorn_ot_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                               const SinkhornOptions& opts = {});

}  // namespace convexmetrics
