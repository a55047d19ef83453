#pragma once

#include <cmath>
#include <cstdint>

namespace topokern {

// Seeding and sampling are pinned to algorithmically specified generators
// (no std::random distributions) so that every seeded artifact reproduces
// bit-for-bit across toolchains.

/// splitmix64: 64-bit state expander used to seed the main generator and to
/// derive independent substreams from a base seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Stateless substream derivation: mixes a base seed with a stream label.
inline std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t stream) {
    SplitMix64 mix(base + stream * 0x9E3779B97F4A7C15ULL);
    return mix.next();
}

/// xoshiro256** seeded by splitmix64 expansion of a 64-bit seed.
class Xoshiro256StarStar {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256StarStar(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : state_) word = sm.next();
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniformOpenLow() {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). bound > 0.
    std::uint64_t below(std::uint64_t bound) { return (*this)() % bound; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// Standard normals via Box-Muller, two uniforms per pair; the second draw
/// of a pair is cached.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniformOpenLow();
        const double u2 = rng_.uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        haveSpare_ = true;
        return radius * std::cos(angle);
    }

    Xoshiro256StarStar& engine() { return rng_; }

private:
    Xoshiro256StarStar rng_;
    double spare_ = 0.0;
    bool haveSpare_ = false;
};

/// Fisher-Yates with the pinned generator; std::shuffle is
/// implementation-defined and would break cross-toolchain reproducibility.
template <typename Seq>
void shuffleSeeded(Seq& items, Xoshiro256StarStar& rng) {
    const std::size_t n = items.size();
    if (n < 2) return;
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        auto tmp = items[i];
        items[i] = items[j];
        items[j] = tmp;
    }
}

} // namespace topokern
