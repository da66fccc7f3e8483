#pragma once

#include <cstdint>

namespace wb {

/// Counter-based splittable generator built on the splitmix64 finalizer.
/// Output i of stream (seed, stream) is mix64(state0 + i*GAMMA), so any
/// substream can be derived from (seed, index) without touching another
/// stream's state. Frozen: golden files depend on this exact mixing.
class SplitMix64Stream {
public:
    explicit SplitMix64Stream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53 random bits.
    double uniform01();

    /// Standard normal via Box-Muller (pairs cached).
    double normal();

    /// Poisson draw. Inversion by sequential search for mean < 30,
    /// otherwise rounded normal approximation with negative draws rejected.
    std::uint64_t poisson(double mean);

    static std::uint64_t mix64(std::uint64_t z);

private:
    std::uint64_t state0_;
    std::uint64_t counter_ = 0;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace wb
