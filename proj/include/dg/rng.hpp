#pragma once

#include <cmath>
#include <cstdint>

namespace dg {

/// SplitMix64 step: the standard seeding/stream-derivation mixer.
/// Advances *state and returns the next 64-bit output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d2b4d97f33db7eULL;
    return z ^ (z >> 31);
}

/// Derive the seed of logical stream `k` from a master seed.
///
/// Defined as two SplitMix64 steps over (master ^ golden*(k+1)) so that
/// nearby master seeds and nearby stream indices give unrelated streams.
/// This mapping is part of the reproducibility contract: a trajectory or
/// sweep point can be replayed in isolation from (master_seed, k) alone.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t k) {
    std::uint64_t s = master_seed ^ (0x9e3779b97f4a7c15ULL * (k + 1));
    (void)splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256++ generator (Blackman & Vigna). Small, fast, and with a
/// 2^256-1 period; state is seeded through SplitMix64 so that any 64-bit
/// seed (including 0) yields a valid nonzero state.
class Xoshiro256pp {
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        have_spare_ = false;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0,1]: 53 high bits, never exactly 0 (safe for log).
    double uniform() {
        const std::uint64_t bits = (*this)() >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    /// Uniform double in [0,1).
    double uniform_co() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Consumption from the underlying
    /// stream is fixed (two uniforms per pair, cached spare), so the draw
    /// sequence is reproducible across platforms.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();      // (0,1], log is finite
        const double u2 = uniform_co();   // [0,1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace dg
