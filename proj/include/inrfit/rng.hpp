#pragma once

#include <cmath>
#include <cstdint>

#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// reproducible across platforms and standard-library versions; the same seed
// always yields the same draw sequence.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform draw in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform draw in [lo, hi). Requires lo < hi; rounding can push
    // lo + (hi-lo)*u onto hi, so the result is nudged back inside.
    double uniform(double lo, double hi) {
        if (!(lo < hi))
            throw ConfigError("Rng::uniform: empty range [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + ")");
        double v = lo + (hi - lo) * uniform01();
        if (v >= hi) v = std::nextafter(hi, lo);
        if (v < lo) v = lo;
        return v;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

inline Matrix uniform_matrix(Rng& rng, int rows, int cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

} // namespace inrfit
