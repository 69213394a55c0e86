#pragma once

// Mixed-radix encoding of multi-indices over string subsets, and the
// per-colour permutation bundles that drive the random model. A composite
// index over a sorted string list (s_0 < s_1 < ...) stores the digit of
// s_0 least significant, base N throughout.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "permtraffic/digraphs.hpp"
#include "permtraffic/rng.hpp"

namespace permtraffic::indexing {

inline int pow_int(int base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= base;
        if (r > (1ll << 30)) throw std::overflow_error("index space too large");
    }
    return static_cast<int>(r);
}

// Encode the digits of the given strings (ascending) from a full digit
// vector indexed by string id.
inline int encode_on(const std::vector<int>& digits, const std::vector<int>& strings, int N) {
    int code = 0, weight = 1;
    for (int s : strings) {
        code += digits[s] * weight;
        weight *= N;
    }
    return code;
}

inline std::vector<int> decode(int code, int count, int N) {
    std::vector<int> d(count);
    for (int i = 0; i < count; ++i) {
        d[i] = code % N;
        code /= N;
    }
    return d;
}

// One uniform permutation of [N^(#S_c)] per colour.
struct ColourPermutations {
    std::vector<std::vector<int>> sigma;  // indexed by colour

    static ColourPermutations identity(const digraphs::StringAssignment& a, int N) {
        ColourPermutations p;
        for (int c = 0; c < a.colour_count(); ++c) {
            int dim = pow_int(N, static_cast<int>(a.strings_of_colour[c].size()));
            std::vector<int> id(dim);
            for (int i = 0; i < dim; ++i) id[i] = i;
            p.sigma.push_back(std::move(id));
        }
        return p;
    }

    // Streams are keyed (seed, trial, colour); N enters as the extra key
    // component so schedules mix independently.
    static ColourPermutations draw(const digraphs::StringAssignment& a, int N, std::uint64_t seed,
                                   std::uint64_t trial) {
        ColourPermutations p;
        for (int c = 0; c < a.colour_count(); ++c) {
            int dim = pow_int(N, static_cast<int>(a.strings_of_colour[c].size()));
            rng::CounterRng g(seed, trial, static_cast<std::uint64_t>(c),
                              static_cast<std::uint64_t>(N));
            p.sigma.push_back(rng::random_permutation(dim, g));
        }
        return p;
    }
};

}  // namespace permtraffic::indexing
