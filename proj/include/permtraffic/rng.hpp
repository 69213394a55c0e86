#pragma once

// Counter-based random streams. A stream is a pure function of its key
// (seed, trial, colour, extra) and a running counter, so trials and colours
// can be generated independently in any order or thread and still reproduce
// bit-for-bit.

#include <cstdint>
#include <limits>
#include <vector>

namespace permtraffic::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t colour,
               std::uint64_t extra = 0) {
        key_ = splitmix64(seed);
        key_ = splitmix64(key_ ^ (trial + 0x632BE59BD9B4E019ull));
        key_ = splitmix64(key_ ^ (colour + 0x9E6C63D0876A9A47ull));
        key_ = splitmix64(key_ ^ (extra + 0xC2B2AE3D27D4EB4Full));
    }

    result_type operator()() { return splitmix64(key_ + 0x9E3779B97F4A7C15ull * counter_++); }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    // Unbiased draw from {0, ..., bound-1}.
    std::uint64_t below(std::uint64_t bound) {
        if (bound < 2) return 0;
        std::uint64_t limit = max() - max() % bound;
        std::uint64_t v;
        do {
            v = (*this)();
        } while (v >= limit);
        return v % bound;
    }

    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform01(), u2 = uniform01();
        if (u1 <= 0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Fisher-Yates with a fixed traversal order so every platform produces the
// same permutation from the same stream.
inline std::vector<int> random_permutation(int n, CounterRng& g) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(g.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

}  // namespace permtraffic::rng
