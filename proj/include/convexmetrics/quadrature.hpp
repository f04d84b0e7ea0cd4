#pragma once

#include <functional>
#include <span>

namespace convexmetrics::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
};

using Integrand = std::function<double(double)>;

// Globally adaptive Gauss-Kronrod (15/31) on a finite interval. Stops when
// the estimated error is below max(abs_tol, rel_tol * L1 norm of f) or the
// panel budget runs out.
Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-11, double abs_tol = 0.0);

// Integral over (lo, hi) where either end may be infinite. Infinite ends are
// compactified by x = center + scale * tan(theta), which turns polynomial
// tails into bounded integrands on a finite theta interval. Finite
// breakpoints strictly inside (lo, hi) split the range, so jumps and kinks
// at known locations never fall inside a Kronrod panel.
Result integrate_line(const Integrand& f, double lo, double hi,
                      std::span<const double> breakpoints = {},
                      double center = 0.0, double scale = 1.0,
                      double rel_tol = 1e-11, double abs_tol = 0.0);

// Integral over the open unit interval with endpoint singularities
// (tanh-sinh). The integrand receives (u, 1 - u) with the complement
// computed without cancellation near u = 1.
Result integrate_unit(const std::function<double(double, double)>& f, double rel_tol = 1e-10);

}  // namespace convexmetrics::quad
