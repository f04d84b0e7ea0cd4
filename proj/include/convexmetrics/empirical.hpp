#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace convexmetrics {

// Weighted point cloud. Points are stored row-major (size() rows of dim()).
// Invariants: at least one point, finite coordinates, nonnegative weights
// summing to one within 1e-12.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights);

    // Uniform weights 1/m.
    static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> points);

    // Rescales weights to sum to one before validating.
    static EmpiricalMeasure normalized(std::size_t dim, std::vector<double> points,
                                       std::vector<double> weights);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * dim_, dim_};
    }
    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

    // True when every weight equals 1/size() exactly as constructed by uniform().
    bool has_uniform_weights() const { return uniform_; }

private:
    std::size_t dim_;
    std::vector<double> points_;
    std::vector<double> weights_;
    bool uniform_ = false;
};

// CSV: one point per row, coordinates then the weight as the final column.
void write_csv(const EmpiricalMeasure& m, std::ostream& out);
EmpiricalMeasure read_empirical_csv(std::istream& in);

}  // namespace convexmetrics
