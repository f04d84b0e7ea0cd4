#include "convexmetrics/random.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

namespace convexmetrics {

std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform_open() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    const double u = uniform_open();
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double Rng::chi_square(double dof) {
    const double u = uniform_open();
    return 2.0 * boost::math::gamma_p_inv(0.5 * dof, u);
}

}  // namespace convexmetrics
