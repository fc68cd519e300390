#pragma once

#include <cmath>
#include <cstdint>

namespace hyperjsq {

// Reproducibility contract
// ------------------------
// All randomness flows through the generators below; none of it depends on
// platform entropy or std::random distributions, so a given (seed, stream)
// pair yields the same draw sequence on every build of this library.
//
//   * SplitMix64 is the stream deriver: derive_stream(seed, k) equals the
//     (k+1)-th output of a SplitMix64 started at `seed`.
//   * Each independent run (simulation, bisection probe, sweep point) owns
//     one Xoshiro256StarStar seeded from a single 64-bit value; its four
//     words are the first four outputs of SplitMix64(seed).
//   * Uniform doubles take the top 53 bits of one 64-bit draw; exponentials
//     use inversion on a (0,1] uniform; bounded integers use rejection
//     sampling, so they are exactly uniform.

struct SplitMix64 {
    std::uint64_t state;

    explicit constexpr SplitMix64(std::uint64_t seed) : state(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

/// Seed for the k-th derived stream of a base seed (k = 0, 1, ...).
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Xoshiro256StarStar {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256StarStar(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (std::uint64_t& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero is a fixed point
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log argument.
    double uniform_open01() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Exponential with the given rate, by inversion.
    double exponential(double rate) { return -std::log(uniform_open01()) / rate; }

    /// Uniform integer in [0, n), unbiased (Lemire with rejection). n >= 1.
    std::uint64_t bounded(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

}  // namespace hyperjsq
