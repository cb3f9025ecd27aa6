#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace treefuse {

// splitmix64 finalizer; good avalanche, cheap, and stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One root seed, streams derived by hashing a coordinate tuple
// (round, purpose, index, ...). Changing the batch size only changes which
// coordinates get used, never what any given coordinate produces, so runs
// stay replayable and checkpoint/resume re-derives the exact same draws.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : engine_(mix64(seed)) {}

    static SplitRng derive(std::uint64_t seed,
                           std::initializer_list<std::uint64_t> coords) {
        std::uint64_t h = mix64(seed);
        for (std::uint64_t c : coords) h = mix64(h ^ mix64(c));
        SplitRng rng(0);
        rng.engine_.seed(h);
        return rng;
    }

    std::mt19937_64& engine() { return engine_; }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    bool bernoulli(double p) {
        return std::bernoulli_distribution(p)(engine_);
    }

    // Beta(a, b) via two gamma draws; the standard library has no beta
    // distribution of its own.
    double beta(double a, double b) {
        double x = std::gamma_distribution<double>(a, 1.0)(engine_);
        double y = std::gamma_distribution<double>(b, 1.0)(engine_);
        double s = x + y;
        if (s <= 0.0) return 0.5;  // both underflowed; a,b are >= 1 here so unreachable in practice
        return x / s;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace treefuse
