// Deterministic random streams. Every stochastic component draws from a
// substream derived from (seed, stream id), so parallel loops reproduce
// bit-identical results regardless of scheduling.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace randcorr {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256** seeded through splitmix64; small, fast, reproducible across
// platforms (unlike std::normal_distribution and friends).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    // Substream derivation: mixes the id into the seed, giving statistically
    // independent streams for distinct ids.
    Rng(std::uint64_t seed, std::uint64_t stream_id)
        : Rng([&] {
              std::uint64_t x = seed ^ 0x5851f42d4c957f2dull;
              std::uint64_t h = splitmix64(x);
              x ^= stream_id * 0xd1342543de82ef95ull;
              return h ^ splitmix64(x);
          }()) {}

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] ^= rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        // Lemire-style rejection; bound is tiny here so bias handling is cheap.
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    double gaussian() {
        // Box-Muller, cache-free variant: spend two uniforms per normal.
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform point on the unit 2-sphere.
    std::array<double, 3> unit_vector() {
        double z = 1.0 - 2.0 * uniform();
        double phi = 2.0 * std::numbers::pi * uniform();
        double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {s * std::cos(phi), s * std::sin(phi), z};
    }

  private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace randcorr
