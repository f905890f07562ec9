#pragma once

// Deterministic random number generation.
//
// Everything stochastic in this library draws from the generator below so
// that a (master seed, stream index) pair reproduces bit-identical results
// on any platform. We deliberately avoid <random> distributions: the
// standard leaves their algorithms implementation-defined, which breaks
// cross-platform reproducibility.
//
// Core generator: xoshiro256++ (Blackman & Vigna), 2^256-1 period.
// Seeding: SplitMix64 expands a 64-bit seed into the 256-bit state.
// Substreams: stream k of master seed m is seeded with the k-th output of
// a SplitMix64 sequence started at m, i.e. mix64(m + (k+1)*GOLDEN).
// Gaussian: Box-Muller on (0,1] uniforms, pair-cached.
// Poisson: Knuth inversion by uniform products; means above 30 are split
// into chunks so the running product stays far from double underflow.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cryochain {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 output function (Stafford mix13 variant used by the reference).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // Expand the seed through SplitMix64; guarantees a nonzero state.
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += detail::kGolden;
            word = detail::mix64(sm);
        }
    }

    // 64-bit sub-seed for stream `stream` of `master` (the stream-th output
    // of a SplitMix64 sequence seeded with master).
    static std::uint64_t derive_subseed(std::uint64_t master, std::uint64_t stream) {
        return detail::mix64(master + (stream + 1) * detail::kGolden);
    }

    // Stream `stream` of master seed `master`: independent, O(1) to derive.
    static Rng substream(std::uint64_t master, std::uint64_t stream) {
        return Rng(derive_subseed(master, stream));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result =
            detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1]; never zero, safe under log().
    double uniform01_open_low() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("Rng::uniform: lo > hi");
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via Box-Muller. Generates a (cos, sin) pair per two
    // uniforms and caches the second value.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(phi);
        have_cached_ = true;
        return r * std::cos(phi);
    }

    double gaussian(double mean, double sigma) {
        if (!(sigma >= 0.0)) throw std::invalid_argument("Rng::gaussian: sigma < 0");
        return mean + sigma * gaussian();
    }

    // Poisson sample by inversion (product of uniforms). Chunking keeps the
    // per-chunk mean <= 30 so exp(-mean) stays comfortably representable.
    long poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("Rng::poisson: mean < 0");
        long total = 0;
        double remaining = mean;
        while (remaining > 0.0) {
            const double chunk = remaining > 30.0 ? 30.0 : remaining;
            remaining -= chunk;
            const double limit = std::exp(-chunk);
            double prod = 1.0;
            long k = -1;
            do {
                prod *= uniform01_open_low();
                ++k;
            } while (prod > limit);
            total += k;
        }
        return total;
    }

private:
    std::uint64_t state_[4] = {};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace cryochain
