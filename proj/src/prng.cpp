#include "workbench/prng.hpp"

#include "workbench/common.hpp"

#include <cmath>

namespace wb {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
}  // namespace

std::uint64_t SplitMix64Stream::mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

SplitMix64Stream::SplitMix64Stream(std::uint64_t seed, std::uint64_t stream)
    : state0_(mix64(seed ^ mix64(stream * kGamma + kStreamSalt))) {}

std::uint64_t SplitMix64Stream::next_u64() {
    ++counter_;
    return mix64(state0_ + counter_ * kGamma);
}

double SplitMix64Stream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitMix64Stream::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

std::uint64_t SplitMix64Stream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw NegativeMean("poisson: mean must be finite and >= 0");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 30.0) {
        // Inversion by sequential search.
        const double u = uniform01();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Normal approximation, rounded, with negative draws rejected.
    for (;;) {
        const double x = mean + std::sqrt(mean) * normal();
        if (x >= -0.5) {
            return static_cast<std::uint64_t>(std::llround(x) < 0 ? 0 : std::llround(x));
        }
    }
}

}  // namespace wb
