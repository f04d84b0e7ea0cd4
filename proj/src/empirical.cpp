#include "convexmetrics/empirical.hpp"

#include "convexmetrics/error.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace convexmetrics {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> points,
                                   std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
    if (dim_ == 0) throw ParameterError("dim", "must be at least 1");
    if (weights_.empty()) throw ParameterError("weights", "empirical measure needs at least one point");
    if (points_.size() != weights_.size() * dim_) {
        throw ParameterError("points", "expected " + std::to_string(weights_.size() * dim_) +
                                           " coordinates, got " + std::to_string(points_.size()));
    }
    for (double x : points_) {
        if (!std::isfinite(x)) throw ParameterError("points", "coordinates must be finite");
    }
    // Neumaier summation: a naive sum of m copies of 1/m drifts by O(m eps).
    double total = 0.0;
    double carry = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weights", "must be finite and nonnegative");
        const double t = total + w;
        carry += std::abs(total) >= w ? (total - t) + w : (w - t) + total;
        total = t;
    }
    total += carry;
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "must sum to 1 (sum = " << std::setprecision(17) << total << ")";
        throw ParameterError("weights", msg.str());
    }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t dim, std::vector<double> points) {
    if (dim == 0) throw ParameterError("dim", "must be at least 1");
    const std::size_t m = points.size() / dim;
    EmpiricalMeasure out(dim, std::move(points), std::vector<double>(m, 1.0 / static_cast<double>(m)));
    out.uniform_ = true;
    return out;
}

EmpiricalMeasure EmpiricalMeasure::normalized(std::size_t dim, std::vector<double> points,
                                              std::vector<double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw ParameterError("weights", "total weight must be positive");
    for (double& w : weights) w /= total;
    return EmpiricalMeasure(dim, std::move(points), std::move(weights));
}

void write_csv(const EmpiricalMeasure& m, std::ostream& out) {
    out << std::setprecision(17);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (double x : m.point(i)) out << x << ',';
        out << m.weights()[i] << '\n';
    }
}

EmpiricalMeasure read_empirical_csv(std::istream& in) {
    std::vector<double> points;
    std::vector<double> weights;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            while (first < last && *first == ' ') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last) {
                throw ConfigError("empirical CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
            row.push_back(v);
        }
        if (row.size() < 2) {
            throw ConfigError("empirical CSV line " + std::to_string(line_no) + ": need coordinates and a weight");
        }
        if (dim == 0) dim = row.size() - 1;
        if (row.size() - 1 != dim) {
            throw ConfigError("empirical CSV line " + std::to_string(line_no) + ": inconsistent dimension");
        }
        points.insert(points.end(), row.begin(), row.end() - 1);
        weights.push_back(row.back());
    }
    if (weights.empty()) throw ConfigError("empirical CSV: no rows");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("empirical CSV: weights do not sum to 1");
    return EmpiricalMeasure::normalized(dim, std::move(points), std::move(weights));
}

}  // namespace convexmetrics
