#pragma once

#include <cstdint>
#include <random>

namespace dzctl::test {

/// Seeded uniform generator shared by the property-style tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

private:
    std::mt19937_64 engine_;
};

}  // namespace dzctl::test
