#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace npr {

// Seed mixing and uniform mappings are spelled out explicitly so that every
// output of the toolkit is reproducible bit-for-bit across platforms and
// standard library versions.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline uint64_t derive_seed(uint64_t base, uint64_t a) {
    return hash_combine(base, a);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
    return hash_combine(hash_combine(base, a), b);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
    return hash_combine(derive_seed(base, a, b), c);
}

// 53-bit mantissa mapping, uniform in [0,1).
inline double u01(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    double uniform01() { return u01(next()); }

    // uniform in [-1, 1]
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    // uniform integer in [0, n); modulo bias is irrelevant at our scales
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace npr
