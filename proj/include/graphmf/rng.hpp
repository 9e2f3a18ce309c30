#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace graphmf {

// All randomness in the library flows through this generator. It is a
// counter-style generator (Vigna's splitmix64), so independent streams can
// be derived from a master seed by hashing labels, and every stream is
// reproducible bit-for-bit across platforms and thread counts.
inline constexpr const char* kRngAlgorithm = "splitmix64-v1";

struct SplitMix64 {
    std::uint64_t state = 0;

    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Exp(rate); uniform() < 1 keeps the log argument strictly positive
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derive the seed of an independent labeled stream from a master seed.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
    return mix64(mix64(master ^ fnv1a(label)) + 0x9E3779B97F4A7C15ULL * (index + 1));
}

}  // namespace graphmf
