// rng.hpp -- deterministic random streams for simulation and generators.
//
// Draws are implemented on top of mt19937_64 with explicit bit-to-double
// conversion so that trajectories are byte-identical across standard
// library implementations. Per-run seeds are derived counter-style from a
// master seed, which makes ensembles reproducible and order-independent.
#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace asis {

// SplitMix64 finalizer. Used both as a seed scrambler and to derive
// independent per-run seeds from (master_seed, counter).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
    return splitmix64(master + counter * 0x9E3779B97F4A7C15ull);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1); never returns 0, so -log(u) is always finite and positive.
    double uniform01_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Exponential holding time with the given rate (rate > 0).
    double exponential(double rate) {
        return -std::log(uniform01_open()) / rate;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Modulo bias is negligible for n << 2^64 and irrelevant for
        // reproducibility, which is what we care about here.
        return engine_() % n;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace asis
