#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace flowvoc {

// Deterministic PRNG used everywhere randomness is needed. Gaussian draws go
// through an explicit Box-Muller so sequences are identical across standard
// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        // splitmix64 expansion of the seed into the xoshiro state
        state_ = seed;
        for (auto& s : xs_) s = splitmix();
        have_cached_ = false;
    }

    std::uint64_t next_u64() {
        // xoshiro256**
        const std::uint64_t result = rotl(xs_[1] * 5, 7) * 9;
        const std::uint64_t t = xs_[1] << 17;
        xs_[2] ^= xs_[0];
        xs_[3] ^= xs_[1];
        xs_[1] ^= xs_[2];
        xs_[0] ^= xs_[3];
        xs_[2] ^= t;
        xs_[3] = rotl(xs_[3], 45);
        return result;
    }

    // Uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection-free Lemire-style reduction is overkill here; modulo bias
        // is negligible for the ranges we use, but stay exact anyway
        std::uint64_t mask = n - 1;
        if ((n & mask) == 0) return next_u64() & mask;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via Box-Muller.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(th);
        have_cached_ = true;
        return r * std::cos(th);
    }

    template <typename T>
    void fill_normal(T* dst, std::size_t n, double scale = 1.0) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<T>(normal() * scale);
    }

    template <typename T>
    void fill_normal(std::vector<T>& dst, double scale = 1.0) {
        fill_normal(dst.data(), dst.size(), scale);
    }

    template <typename T>
    void fill_uniform(std::vector<T>& dst, double lo, double hi) {
        for (auto& v : dst) v = static_cast<T>(uniform(lo, hi));
    }

    // Derive an independent stream (for per-purpose substreams).
    Rng fork(std::uint64_t tag) {
        return Rng(next_u64() ^ (tag * 0x9e3779b97f4a7c15ULL));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t splitmix() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    std::uint64_t xs_[4] = {};
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace flowvoc
