#pragma once

#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace odct {

/// Deterministic random source. Wraps std::mt19937_64 but derives every
/// variate with fixed arithmetic instead of std::*_distribution, whose
/// output is implementation-defined; streams are reproducible across
/// standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        assert(n > 0);
        const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= reject_below) return x % n;
        }
    }

    /// Standard normal via Box-Muller; the paired variate is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out, double scale = 1.0) {
        for (double& x : out) x = normal() * scale;
    }

    /// Draws an index proportionally to non-negative weights. Total weight
    /// must be positive.
    std::size_t weighted_index(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        assert(total > 0.0);
        const double r = uniform() * total;
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = i;
            cum += weights[i];
            if (r < cum) return i;
        }
        return last_positive;  // float accumulation undershoot
    }

    /// Fisher-Yates shuffle driven by uniform_int.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_int(i)]);
        }
    }

    /// splitmix64 finalizer; used to derive independent stream seeds so
    /// that consumers never share or reorder each other's draws.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    /// Full generator state as text (mt19937_64's standard-defined decimal
    /// serialization plus the Box-Muller cache). from_state_string restores
    /// it exactly, so checkpointed streams resume mid-sequence.
    std::string state_string() const {
        std::ostringstream os;
        os << engine_ << ' ' << (has_cached_ ? 1 : 0) << ' '
           << std::bit_cast<std::uint64_t>(cached_);
        return os.str();
    }

    static Rng from_state_string(const std::string& s) {
        Rng r(0);
        std::istringstream is(s);
        int has_cached = 0;
        std::uint64_t cached_bits = 0;
        is >> r.engine_ >> has_cached >> cached_bits;
        assert(is);
        r.has_cached_ = has_cached != 0;
        r.cached_ = std::bit_cast<double>(cached_bits);
        return r;
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace odct
