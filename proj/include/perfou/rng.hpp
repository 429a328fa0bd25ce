#pragma once

#include <cstdint>
#include <random>

namespace perfou {

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for replicate r at sample size n. Depends only on its arguments, never on scheduling.
constexpr std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t n,
                                       std::uint64_t replicate) noexcept {
    return mix64(mix64(mix64(master_seed) ^ n) ^ replicate);
}

// Standard normal stream. Same seed gives the same sequence on a given build.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(mix64(seed)) {}

    double operator()() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace perfou
