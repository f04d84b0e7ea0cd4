#include "convexmetrics/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace convexmetrics::quad {

namespace {

// Panel budget per call. Each panel costs 31 evaluations; the cap bounds the
// work when the error estimate sits at its roundoff floor.
constexpr std::size_t kMaxPanels = 600;

double to_theta(double x, double center, double scale) {
    if (x == -std::numeric_limits<double>::infinity()) return -std::numbers::pi / 2;
    if (x == std::numeric_limits<double>::infinity()) return std::numbers::pi / 2;
    return std::atan((x - center) / scale);
}

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod_panel(const Integrand& f, double a, double b) {
    Panel p{a, b, 0.0, 0.0, 0.0};
    p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
    return p;
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
    if (!(a < b)) return {};
    // Global adaptive bisection: always split the panel with the largest
    // error estimate.
    std::priority_queue<Panel> heap;
    heap.push(kronrod_panel(f, a, b));
    double value = heap.top().value;
    double error = heap.top().error;
    double l1 = heap.top().l1;
    while (heap.size() < kMaxPanels && error > std::max(abs_tol, rel_tol * l1)) {
        const Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        const Panel left = kronrod_panel(f, worst.a, mid);
        const Panel right = kronrod_panel(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error};
}

Result integrate_line(const Integrand& f, double lo, double hi,
                      std::span<const double> breakpoints, double center, double scale,
                      double rel_tol, double abs_tol) {
    if (!(lo < hi)) return {};
    std::vector<double> cuts{lo};
    for (double b : breakpoints) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto mapped = [&](double theta) {
        const double c = std::cos(theta);
        if (c <= 0.0) return 0.0;
        const double x = center + scale * std::tan(theta);
        if (!std::isfinite(x)) return 0.0;
        const double v = f(x);
        return v == 0.0 ? 0.0 : v * scale / (c * c);
    };

    Result total;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double t0 = to_theta(cuts[k], center, scale);
        const double t1 = to_theta(cuts[k + 1], center, scale);
        const Result r = integrate(mapped, t0, t1, rel_tol, abs_tol / static_cast<double>(cuts.size() - 1));
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

Result integrate_unit(const std::function<double(double, double)>& f, double rel_tol) {
    boost::math::quadrature::tanh_sinh<double> integrator(15);
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    // Boost passes the signed distance to the nearest endpoint: a - x on the
    // left half (negative) and b - x on the right half.
    const auto g = [&](double u, double dist) {
        const double uc = dist > 0.0 ? dist : 1.0 - u;
        return f(u, uc);
    };
    const double value = integrator.integrate(g, 0.0, 1.0, rel_tol, &error, &l1, &levels);
    return {value, error};
}

}  // namespace convexmetrics::quad
