#pragma once

#include <cstdint>
#include <utility>

namespace notchset {

// Identifies one reproducible random stream. Identical (seed, stream) pairs
// produce identical draws on every platform; see Rng below.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// xoshiro256++ with SplitMix64 state seeding. Chosen over <random> engines +
// distributions because the standard distributions are not bit-reproducible
// across library implementations.
class Rng {
public:
    explicit Rng(RngSpec spec);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double uniform();

    // Uniform in [0, 2*pi).
    double uniform_phase();

    // Uniform integer in [0, bound), bound >= 1. Unbiased (rejection).
    std::uint64_t uniform_below(std::uint64_t bound);

    // Standard complex circular Gaussian pair via Box-Muller:
    // returns (re, im), each N(0, 1/2), so |z|^2 has mean 1.
    std::pair<double, double> gaussian_pair();

private:
    std::uint64_t s_[4];
};

}  // namespace notchset
