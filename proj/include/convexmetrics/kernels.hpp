#pragma once

// Data-parallel inner loops. Every kernel has a Serial reference path and an
// OpenMP path; both produce bitwise-identical results because work is split
// into fixed chunks whose partial results are merged in chunk order.

#include "convexmetrics/random.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace convexmetrics {

enum class Execution { Serial, Parallel };

namespace kernels {

// Streaming moments up to order four (Pebay's update and merge formulas).
struct RunningStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;

    void push(double x);
    void merge(const RunningStats& other);

    double variance() const;        // unbiased sample variance
    double std_error() const;       // of the mean
    double variance_std_error() const;  // of the sample variance
};

inline constexpr std::size_t kChunkSize = 4096;

// Monte-Carlo reduction. Chunk k of the budget draws from Rng(mix_seed(seed, k)),
// so the result depends only on (seed, budget), never on the thread count.
using SampleStatistic = std::function<double(Rng&)>;
RunningStats monte_carlo(std::uint64_t seed, std::size_t budget,
                         const SampleStatistic& draw, Execution exec);

// Dense row-major cost matrix C_ij = |x_i - y_j|^p (Euclidean norm).
std::vector<double> cost_matrix(std::span<const double> x, std::span<const double> y,
                                std::size_t dim, double p, Execution exec);

// Row-wise soft minimum used by log-domain Sinkhorn:
//   out_i = -eps * log sum_j exp((g_j - C_ij) / eps + log_w_j).
// cost is rows x cols, row-major.
void softmin_rows(std::span<const double> cost, std::size_t rows, std::size_t cols,
                  std::span<const double> g, std::span<const double> log_w, double eps,
                  std::span<double> out, Execution exec);

// Row sums of the coupling exp((f_i + g_j - C_ij)/eps + log_a_i + log_b_j).
void coupling_row_sums(std::span<const double> cost, std::size_t rows, std::size_t cols,
                       std::span<const double> f, std::span<const double> g,
                       std::span<const double> log_a, std::span<const double> log_b,
                       double eps, std::span<double> out, Execution exec);

}  // namespace kernels
}  // namespace convexmetrics
