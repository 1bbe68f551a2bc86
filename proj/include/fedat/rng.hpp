#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace fedat {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a stream seed from a master seed plus structured ids
/// (client, round, purpose tag, ...). Streams with distinct ids are
/// statistically independent, so consuming one never shifts another.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t id : ids) h = mix64(h ^ mix64(id));
    return h;
}

/// Hash for string purpose tags used in derive_seed.
inline std::uint64_t tag(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001b3ULL;
    return h;
}

/// Deterministic random stream. All draw primitives are implemented on top
/// of the raw mt19937_64 output so the draw sequence is pinned by this code,
/// not by the standard library's distribution internals.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Box-Muller without caching; consumes two raw draws (the log(0) guard
    /// redraws with probability 2^-53).
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = unit();
        double u2 = unit();
        while (u1 <= 0.0) u1 = unit();  // log(0) guard
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) { return unit() < p; }

    /// Uniform index in [0, n); n must be positive.
    std::size_t index(std::size_t n) {
        // Lemire multiply-shift; bias is negligible for n << 2^64 and the
        // mapping is fully specified, unlike std::uniform_int_distribution.
        return static_cast<std::size_t>((static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = index(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

   private:
    std::mt19937_64 gen_;
};

}  // namespace fedat
