#pragma once

#include <cstdint>

// Counter-based splittable randomness. Every consumer derives an independent
// substream seed from (master seed, tags...), so generation order and
// parallel scheduling cannot change results.
namespace crowdfuse::rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed + kGamma * (tag + 1));
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive(derive(seed, a), b);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) {
    return derive(derive(seed, a, b), c);
}

// splitmix64 sequence seeded by a derived substream value
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix64(state_);
    }

    // uniform in [0, 1) with 53 random bits
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    int bit() { return static_cast<int>(next_u64() >> 63); }

    std::uint32_t below(std::uint32_t n) {
        // modulo bias is ~n/2^64, irrelevant at our ranges
        return static_cast<std::uint32_t>(next_u64() % n);
    }

private:
    std::uint64_t state_;
};

}  // namespace crowdfuse::rng
