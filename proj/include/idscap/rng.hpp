// Deterministic random number generation for the channel simulator.
//
// The generator is xoshiro256** seeded through splitmix64 from an explicit
// 64-bit seed, so traces are bit-reproducible across platforms and runs.
// Draw order inside the simulator: per transmitted symbol, the state draw
// comes first (initial-distribution draw for the first symbol, transition
// draw afterwards), then the symbol-output draw.
#pragma once

#include <cstdint>
#include <vector>

#include "idscap/errors.hpp"

namespace idscap {

struct SplitMix64 {
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state;
};

class Xoshiro256StarStar {
  public:
    explicit Xoshiro256StarStar(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5ULL, 7) * 9ULL;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Index sampled from the given (sub)probability weights by linear
    /// cumulative scan; falls back to the last positive weight so rounding
    /// at the top of the interval can never fall off the end.
    std::size_t next_index(const std::vector<double>& weights) {
        const double u = next_double();
        double acc = 0.0;
        std::size_t last_positive = weights.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = i;
            acc += weights[i];
            if (u < acc) return i;
        }
        if (last_positive == weights.size()) throw ValidationError("next_index: no positive weight");
        return last_positive;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace idscap
