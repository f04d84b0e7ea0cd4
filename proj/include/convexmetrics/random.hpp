#pragma once

#include <cstdint>
#include <random>

namespace convexmetrics {

// splitmix64 finalizer; used to derive independent per-chunk / per-pair seeds
// from a root seed so results do not depend on thread scheduling.
std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream);

// Deterministic generator wrapper. Uniforms are built from the top 53 bits
// of mt19937_64 so they are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0, 1).
    double uniform_open();

    // Standard normal through the inverse CDF of uniform_open().
    double normal();

    // Chi-square with the given (real) degrees of freedom.
    double chi_square(double dof);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace convexmetrics
