#include "convexmetrics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace convexmetrics::kernels {

void RunningStats::push(double x) {
    RunningStats one;
    one.count = 1;
    one.mean = x;
    merge(one);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(o.count);
    const double n = na + nb;
    const double delta = o.mean - mean;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;

    const double new_m4 = m4 + o.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                          6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (n * n) +
                          4.0 * delta * (na * o.m3 - nb * m3) / n;
    const double new_m3 = m3 + o.m3 + d3 * na * nb * (na - nb) / (n * n) +
                          3.0 * delta * (na * o.m2 - nb * m2) / n;
    const double new_m2 = m2 + o.m2 + d2 * na * nb / n;

    mean += delta * nb / n;
    m2 = new_m2;
    m3 = new_m3;
    m4 = new_m4;
    count += o.count;
}

double RunningStats::variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
}

double RunningStats::std_error() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

double RunningStats::variance_std_error() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double pop_var = m2 / n;
    const double fourth = m4 / n;
    return std::sqrt(std::max(0.0, fourth - pop_var * pop_var) / n);
}

RunningStats monte_carlo(std::uint64_t seed, std::size_t budget, const SampleStatistic& draw,
                         Execution exec) {
    const std::size_t chunks = (budget + kChunkSize - 1) / kChunkSize;
    std::vector<RunningStats> partial(chunks);
    const auto run_chunk = [&](std::size_t k) {
        Rng rng(mix_seed(seed, k));
        const std::size_t begin = k * kChunkSize;
        const std::size_t end = std::min(budget, begin + kChunkSize);
        RunningStats local;
        for (std::size_t i = begin; i < end; ++i) local.push(draw(rng));
        partial[k] = local;
    };

    if (exec == Execution::Parallel) {
        const auto n = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < n; ++k) run_chunk(static_cast<std::size_t>(k));
    } else {
        for (std::size_t k = 0; k < chunks; ++k) run_chunk(k);
    }

    RunningStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

std::vector<double> cost_matrix(std::span<const double> x, std::span<const double> y,
                                std::size_t dim, double p, Execution exec) {
    const std::size_t rows = x.size() / dim;
    const std::size_t cols = y.size() / dim;
    std::vector<double> cost(rows * cols);
    const auto fill_row = [&](std::size_t i) {
        const double* xi = x.data() + i * dim;
        for (std::size_t j = 0; j < cols; ++j) {
            const double* yj = y.data() + j * dim;
            double sq = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = xi[d] - yj[d];
                sq += diff * diff;
            }
            double c;
            if (p == 2.0) {
                c = sq;
            } else if (p == 1.0) {
                c = std::sqrt(sq);
            } else {
                c = std::pow(std::sqrt(sq), p);
            }
            cost[i * cols + j] = c;
        }
    };
    if (exec == Execution::Parallel) {
        const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < rows; ++i) fill_row(i);
    }
    return cost;
}

namespace {

double row_softmin(const double* c, std::size_t cols, const double* g, const double* log_w,
                   double eps) {
    // One streaming pass; the running sum is rescaled whenever the peak moves.
    const double inv = 1.0 / eps;
    double peak = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        const double t = (g[j] - c[j]) * inv + log_w[j];
        if (t > peak) {
            sum = sum * std::exp(peak - t) + 1.0;
            peak = t;
        } else if (t > peak - 40.0) {
            // Terms below e^-40 of the peak cannot move a double sum that already holds 1.
            sum += std::exp(t - peak);
        }
    }
    if (!std::isfinite(peak)) return std::numeric_limits<double>::infinity();
    return -eps * (peak + std::log(sum));
}

}  // namespace

void softmin_rows(std::span<const double> cost, std::size_t rows, std::size_t cols,
                  std::span<const double> g, std::span<const double> log_w, double eps,
                  std::span<double> out, Execution exec) {
    if (exec == Execution::Parallel) {
        const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto r = static_cast<std::size_t>(i);
            out[r] = row_softmin(cost.data() + r * cols, cols, g.data(), log_w.data(), eps);
        }
    } else {
        for (std::size_t r = 0; r < rows; ++r) {
            out[r] = row_softmin(cost.data() + r * cols, cols, g.data(), log_w.data(), eps);
        }
    }
}

void coupling_row_sums(std::span<const double> cost, std::size_t rows, std::size_t cols,
                       std::span<const double> f, std::span<const double> g,
                       std::span<const double> log_a, std::span<const double> log_b,
                       double eps, std::span<double> out, Execution exec) {
    const double inv = 1.0 / eps;
    const auto row = [&](std::size_t r) {
        const double* c = cost.data() + r * cols;
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double t = (f[r] + g[j] - c[j]) * inv + log_a[r] + log_b[j];
            if (t > -745.0) sum += std::exp(t);
        }
        out[r] = sum;
    };
    if (exec == Execution::Parallel) {
        const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) row(static_cast<std::size_t>(i));
    } else {
        for (std::size_t r = 0; r < rows; ++r) row(r);
    }
}

}  // namespace convexmetrics::kernels
