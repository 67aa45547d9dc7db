// Seed derivation and explicit samplers.
//
// All randomness in the library flows through Rng so that results are
// reproducible bit-for-bit for a fixed seed, independent of platform
// library implementations of <random> distributions.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hcm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Hash a (master, stream) pair into an independent-looking substream seed.
// Used for per-trial / per-block / per-replicate streams; never sequential.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master ^ 0x6A09E667F3BCC909ULL) + splitmix64(stream));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform01_open0() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Unbiased integer in [0, m) by rejection.
    std::uint64_t bounded(std::uint64_t m) {
        if (m == 0) return 0;
        const std::uint64_t threshold = (0 - m) % m;  // 2^64 mod m
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % m;
        }
    }

    // Standard normal via Box-Muller (no cached second value, so the
    // draw sequence is a pure function of the generator state).
    double normal() {
        const double u1 = uniform01_open0();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace hcm
