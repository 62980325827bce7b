#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ihr::rng {

// splitmix64; fully specified so streams are identical across platforms and
// independent of the standard library's distribution implementations.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// hash-combine for deriving child seeds from a root seed
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    SplitMix64 s(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2)));
    s.next();
    return s.next() ^ b;
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix(a, b), c);
}

// Box-Muller on top of SplitMix64
struct GaussianStream {
    SplitMix64 engine;
    bool has_spare = false;
    double spare = 0.0;

    explicit GaussianStream(std::uint64_t seed) : engine(seed) {}

    double next() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        // u1 in (0,1] to keep log finite
        double u1 = 1.0 - engine.uniform();
        double u2 = engine.uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare = r * std::sin(theta);
        has_spare = true;
        return r * std::cos(theta);
    }
};

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& s) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(s.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace ihr::rng
