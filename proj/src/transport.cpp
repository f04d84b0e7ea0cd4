#include "convexmetrics/transport.hpp"

#include "convexmetrics/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace convexmetrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Mass below this is treated as exhausted (weights sum to one).
constexpr double kMassFloor = 1e-15;

double ground_cost(std::span<const double> x, std::span<const double> y, double p) {
    double sq = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double diff = x[d] - y[d];
        sq += diff * diff;
    }
    if (p == 2.0) return sq;
    if (p == 1.0) return std::sqrt(sq);
    return std::pow(std::sqrt(sq), p);
}

void fill_residuals(TransportPlan& plan, std::span<const double> a, std::span<const double> b) {
    std::vector<double> rows(plan.rows, 0.0);
    std::vector<double> cols(plan.cols, 0.0);
    for (const auto& e : plan.coupling) {
        rows[e.i] += e.mass;
        cols[e.j] += e.mass;
    }
    plan.row_residual = 0.0;
    plan.col_residual = 0.0;
    for (std::size_t i = 0; i < plan.rows; ++i) plan.row_residual += std::abs(rows[i] - a[i]);
    for (std::size_t j = 0; j < plan.cols; ++j) plan.col_residual += std::abs(cols[j] - b[j]);
}

void check_inputs(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
    if (a.dim() != b.dim()) throw ParameterError("b", "point clouds must share a dimension");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("p", "transport order must be >= 1");
}

std::vector<std::size_t> sorted_order(const EmpiricalMeasure& m) {
    std::vector<std::size_t> idx(m.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t l, std::size_t r) { return m.point(l)[0] < m.point(r)[0]; });
    return idx;
}

// Monotone (quantile) coupling of two 1D measures.
TransportPlan monotone_plan(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
    TransportPlan plan;
    plan.rows = a.size();
    plan.cols = b.size();
    plan.p = p;
    const auto ia = sorted_order(a);
    const auto ib = sorted_order(b);

    if (a.has_uniform_weights() && b.has_uniform_weights() && a.size() == b.size()) {
        plan.method = "sorted-matching";
        const double w = 1.0 / static_cast<double>(a.size());
        double total = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            plan.coupling.push_back({ia[k], ib[k], w});
            total += ground_cost(a.point(ia[k]), b.point(ib[k]), p);
        }
        plan.cost = total * w;
    } else {
        plan.method = "monotone-coupling";
        std::size_t ka = 0;
        std::size_t kb = 0;
        double ra = a.weights()[ia[0]];
        double rb = b.weights()[ib[0]];
        while (ka < a.size() && kb < b.size()) {
            const double mass = std::min(ra, rb);
            if (mass > 0.0) {
                plan.coupling.push_back({ia[ka], ib[kb], mass});
                plan.cost += mass * ground_cost(a.point(ia[ka]), b.point(ib[kb]), p);
            }
            ra -= mass;
            rb -= mass;
            if (ra <= kMassFloor && ka + 1 < a.size()) {
                ra = a.weights()[ia[++ka]];
            } else if (ra <= kMassFloor) {
                ++ka;
            }
            if (rb <= kMassFloor && kb + 1 < b.size()) {
                rb = b.weights()[ib[++kb]];
            } else if (rb <= kMassFloor) {
                ++kb;
            }
        }
    }
    fill_residuals(plan, a.weights(), b.weights());
    return plan;
}

}  // namespace

double TransportPlan::distance() const {
    return std::pow(std::max(0.0, cost), 1.0 / p);
}

std::vector<double> TransportPlan::dense() const {
    std::vector<double> out(rows * cols, 0.0);
    for (const auto& e : coupling) out[e.i * cols + e.j] += e.mass;
    return out;
}

void write_plan_csv(const TransportPlan& plan, std::ostream& out) {
    const auto old = out.precision(17);
    out << "row,col,mass\n";
    for (const auto& e : plan.coupling) out << e.i << ',' << e.j << ',' << e.mass << '\n';
    out.precision(old);
}

TransportPlan exact_ot_from_cost(std::span<const double> cost, std::span<const double> a,
                                 std::span<const double> b) {
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    if (cost.size() != m * n) throw ParameterError("cost", "matrix size does not match the weights");

    // Successive shortest paths on the bipartite residual graph. Left node i
    // carries supply a_i, right node j demand b_j; forward arcs i->j have cost
    // C_ij, backward arcs j->i exist while flow_ij > 0. Reduced costs
    // C_ij + piL_i - piR_j stay nonnegative on every residual arc.
    std::vector<double> flow(m * n, 0.0);
    std::vector<double> supply(a.begin(), a.end());
    std::vector<double> demand(b.begin(), b.end());
    std::vector<double> pi_l(m, 0.0);
    std::vector<double> pi_r(n, 0.0);
    std::vector<double> dist_l(m);
    std::vector<double> dist_r(n);
    std::vector<char> done_l(m);
    std::vector<char> done_r(n);
    std::vector<std::ptrdiff_t> pred_r(n);  // left node that reached j
    std::vector<std::ptrdiff_t> pred_l(m);  // right node that reached i, -1 for a root

    TransportPlan plan;
    plan.rows = m;
    plan.cols = n;
    plan.method = "min-cost-flow";

    const auto has_supply = [&] {
        return std::any_of(supply.begin(), supply.end(), [](double s) { return s > kMassFloor; });
    };
    const auto has_demand = [&] {
        return std::any_of(demand.begin(), demand.end(), [](double d) { return d > kMassFloor; });
    };

    while (has_supply() && has_demand()) {
        std::fill(done_l.begin(), done_l.end(), 0);
        std::fill(done_r.begin(), done_r.end(), 0);
        std::fill(dist_r.begin(), dist_r.end(), kInf);
        for (std::size_t i = 0; i < m; ++i) {
            dist_l[i] = supply[i] > kMassFloor ? 0.0 : kInf;
            pred_l[i] = -1;
        }

        std::ptrdiff_t target = -1;
        double reach = kInf;
        for (;;) {
            double best = kInf;
            std::ptrdiff_t best_node = -1;
            bool best_is_right = false;
            for (std::size_t i = 0; i < m; ++i) {
                if (!done_l[i] && dist_l[i] < best) {
                    best = dist_l[i];
                    best_node = static_cast<std::ptrdiff_t>(i);
                    best_is_right = false;
                }
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!done_r[j] && dist_r[j] < best) {
                    best = dist_r[j];
                    best_node = static_cast<std::ptrdiff_t>(j);
                    best_is_right = true;
                }
            }
            if (best_node < 0) break;
            const auto u = static_cast<std::size_t>(best_node);
            if (best_is_right) {
                done_r[u] = 1;
                if (demand[u] > kMassFloor) {
                    target = best_node;
                    reach = best;
                    break;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    if (done_l[i] || flow[i * n + u] <= 0.0) continue;
                    const double rc = std::max(0.0, -cost[i * n + u] + pi_r[u] - pi_l[i]);
                    if (best + rc < dist_l[i]) {
                        dist_l[i] = best + rc;
                        pred_l[i] = best_node;
                    }
                }
            } else {
                done_l[u] = 1;
                const double* row = cost.data() + u * n;
                for (std::size_t j = 0; j < n; ++j) {
                    if (done_r[j]) continue;
                    const double rc = std::max(0.0, row[j] + pi_l[u] - pi_r[j]);
                    if (best + rc < dist_r[j]) {
                        dist_r[j] = best + rc;
                        pred_r[j] = best_node;
                    }
                }
            }
        }
        if (target < 0) throw EstimatorError("min-cost flow: no augmenting path (inconsistent masses)");

        for (std::size_t i = 0; i < m; ++i) pi_l[i] += std::min(dist_l[i], reach);
        for (std::size_t j = 0; j < n; ++j) pi_r[j] += std::min(dist_r[j], reach);

        // Bottleneck along the path target <- ... <- root.
        double delta = demand[static_cast<std::size_t>(target)];
        std::size_t j = static_cast<std::size_t>(target);
        std::size_t root = 0;
        for (;;) {
            const auto i = static_cast<std::size_t>(pred_r[j]);
            if (pred_l[i] < 0) {
                root = i;
                break;
            }
            const auto jb = static_cast<std::size_t>(pred_l[i]);
            delta = std::min(delta, flow[i * n + jb]);
            j = jb;
        }
        delta = std::min(delta, supply[root]);

        j = static_cast<std::size_t>(target);
        for (;;) {
            const auto i = static_cast<std::size_t>(pred_r[j]);
            flow[i * n + j] += delta;
            if (pred_l[i] < 0) break;
            const auto jb = static_cast<std::size_t>(pred_l[i]);
            flow[i * n + jb] -= delta;
            j = jb;
        }
        supply[root] -= delta;
        demand[static_cast<std::size_t>(target)] -= delta;
        ++plan.iterations;
    }

    double cost_scale = 1.0;
    for (double c : cost) cost_scale = std::max(cost_scale, c);
    double slack = 0.0;
    double primal = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double c = cost[i * n + j];
            const double rc = c + pi_l[i] - pi_r[j];
            slack = std::max(slack, -rc);
            const double f = flow[i * n + j];
            if (f > 0.0) {
                slack = std::max(slack, std::abs(rc));
                plan.coupling.push_back({i, j, f});
                primal += f * c;
            }
        }
    }
    double dual = 0.0;
    for (std::size_t i = 0; i < m; ++i) dual -= a[i] * pi_l[i];
    for (std::size_t j = 0; j < n; ++j) dual += b[j] * pi_r[j];
    plan.cost = primal;
    plan.slackness_residual = slack / cost_scale;
    plan.duality_gap = std::abs(primal - dual) / std::max(1.0, std::abs(primal));
    fill_residuals(plan, a, b);
    return plan;
}

TransportPlan exact_ot_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                            std::size_t max_entries) {
    check_inputs(a, b, p);
    if (a.size() * b.size() > max_entries) {
        throw ResourceError("exact transport needs " + std::to_string(a.size() * b.size()) +
                            " cost entries (cap " + std::to_string(max_entries) +
                            "); use the entropic solver instead");
    }
    if (a.dim() == 1) return monotone_plan(a, b, p);
    const auto cost = kernels::cost_matrix(a.points(), b.points(), a.dim(), p, Execution::Parallel);
    TransportPlan plan = exact_ot_from_cost(cost, a.weights(), b.weights());
    plan.p = p;
    return plan;
}

TransportPlan sinkhorn_ot_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                               const SinkhornOptions& opts) {
    check_inputs(a, b, p);
    if (!(opts.reg > 0.0)) throw ParameterError("reg", "entropic regularization must be positive");
    if (opts.max_iter < 1) throw ParameterError("max_iter", "need at least one iteration");
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    const auto cost = kernels::cost_matrix(a.points(), b.points(), a.dim(), p, opts.exec);
    std::vector<double> cost_t(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) cost_t[j * m + i] = cost[i * n + j];
    }
    std::vector<double> log_a(m);
    std::vector<double> log_b(n);
    for (std::size_t i = 0; i < m; ++i) log_a[i] = std::log(a.weights()[i]);
    for (std::size_t j = 0; j < n; ++j) log_b[j] = std::log(b.weights()[j]);

    std::vector<double> f(m, 0.0);
    std::vector<double> g(n, 0.0);
    std::vector<double> rows(m);
    const auto residual = [&](double eps) {
        kernels::coupling_row_sums(cost, m, n, f, g, log_a, log_b, eps, rows, opts.exec);
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) r += std::abs(rows[i] - a.weights()[i]);
        return r;
    };
    const auto sweep = [&](double eps) {
        kernels::softmin_rows(cost, m, n, g, log_b, eps, f, opts.exec);
        kernels::softmin_rows(cost_t, n, m, f, log_a, eps, g, opts.exec);
    };

    double max_cost = 0.0;
    for (double c : cost) max_cost = std::max(max_cost, c);
    double eps = std::max(opts.reg, max_cost);

    TransportPlan plan;
    plan.rows = m;
    plan.cols = n;
    plan.p = p;
    plan.method = "sinkhorn";
    plan.converged = false;

    constexpr int kCheckEvery = 5;
    int iter = 0;
    // Annealing stages: a few sweeps per halving of eps, warm-started.
    while (eps > opts.reg && iter < opts.max_iter) {
        for (int k = 0; k < 2 * kCheckEvery && iter < opts.max_iter; ++k, ++iter) sweep(eps);
        eps = std::max(opts.reg, 0.5 * eps);
    }
    eps = opts.reg;
    double res = kInf;
    while (iter < opts.max_iter) {
        for (int k = 0; k < kCheckEvery && iter < opts.max_iter; ++k, ++iter) sweep(eps);
        res = residual(eps);
        if (res <= opts.tol) {
            plan.converged = true;
            break;
        }
    }
    plan.iterations = iter;

    const double inv = 1.0 / eps;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double t = (f[i] + g[j] - cost[i * n + j]) * inv + log_a[i] + log_b[j];
            if (t < -745.0) continue;
            const double mass = std::exp(t);
            if (mass <= 0.0) continue;
            plan.coupling.push_back({i, j, mass});
            plan.cost += mass * cost[i * n + j];
        }
    }
    fill_residuals(plan, a.weights(), b.weights());
    return plan;
}

}  // namespace convexmetrics
