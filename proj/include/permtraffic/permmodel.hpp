#pragma once

// Support-aware operands for the random permutation model: matrices that act
// on a subset of the tensor legs and are identity elsewhere. Products and
// norms are evaluated on the union of the active supports, so the ambient
// dimension N^{#S} is never materialized unless the data genuinely lives
// there. On top of that sit the conjugated lifts, the centered word norm of
// the graph independence theorem, the decay experiment, and the microstate
// transport for graph products.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "permtraffic/digraphs.hpp"
#include "permtraffic/errors.hpp"
#include "permtraffic/indexing.hpp"
#include "permtraffic/linalg.hpp"
#include "permtraffic/rng.hpp"

namespace permtraffic::permmodel {

using digraphs::ColourGraph;
using digraphs::StringAssignment;
using indexing::ColourPermutations;
using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

constexpr long kDefaultNormCap = 4096;

inline long checked_dim(int N, std::size_t legs, long cap) {
    long dim = 1;
    for (std::size_t i = 0; i < legs; ++i) {
        dim *= N;
        if (dim > cap)
            throw ResourceError("operand dimension " + std::to_string(dim) +
                                " exceeds the materialization cap " + std::to_string(cap));
    }
    return dim;
}

// A matrix acting on the tensor legs named by `support` (sorted string ids)
// and implicitly the identity on every other string. The represented ambient
// operator is payload placed on those legs, so traces, 2-norms (normalized)
// and operator norms of the payload coincide with the ambient ones.
struct TensorOperand {
    StringAssignment assignment;
    int N = 0;
    std::vector<int> support;  // sorted, unique, within [0, string_count)
    Matrix payload;
    long norm_cap = kDefaultNormCap;

    static TensorOperand make(const StringAssignment& a, int N, std::vector<int> support,
                              Matrix payload, long norm_cap = kDefaultNormCap) {
        TensorOperand x;
        x.assignment = a;
        x.N = N;
        std::sort(support.begin(), support.end());
        if (std::adjacent_find(support.begin(), support.end()) != support.end())
            throw std::invalid_argument("operand: duplicate string in support");
        for (int s : support)
            if (s < 0 || s >= a.string_count)
                throw std::invalid_argument("operand: support string out of range");
        x.support = std::move(support);
        long dim = checked_dim(N, x.support.size(), norm_cap);
        if (payload.rows() != payload.cols() || payload.rows() != dim)
            throw std::invalid_argument("operand: payload dimension mismatch");
        x.payload = std::move(payload);
        x.norm_cap = norm_cap;
        return x;
    }

    static TensorOperand scalar(const StringAssignment& a, int N, Complex value,
                                long norm_cap = kDefaultNormCap) {
        Matrix one(1, 1);
        one(0, 0) = value;
        return make(a, N, {}, std::move(one), norm_cap);
    }

    long dim() const { return payload.rows(); }
};

namespace detail {

inline void require_same_space(const TensorOperand& a, const TensorOperand& b) {
    if (a.N != b.N || a.assignment.string_count != b.assignment.string_count ||
        a.assignment.strings_of_colour != b.assignment.strings_of_colour)
        throw std::invalid_argument("operands live in different model spaces");
}

inline std::vector<int> union_support(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// positions of `sub` inside `sup` (both sorted, sub included in sup)
inline std::vector<int> leg_positions(const std::vector<int>& sub, const std::vector<int>& sup) {
    std::vector<int> pos;
    for (int s : sub) {
        auto it = std::lower_bound(sup.begin(), sup.end(), s);
        if (it == sup.end() || *it != s)
            throw std::invalid_argument("operand support is not contained in the target");
        pos.push_back(static_cast<int>(it - sup.begin()));
    }
    return pos;
}

}  // namespace detail

// Kronecker-extends the payload with identities on the added strings, legs
// placed by string order.
inline TensorOperand lift(const TensorOperand& x, std::vector<int> target_support) {
    std::sort(target_support.begin(), target_support.end());
    if (target_support == x.support) return x;
    auto pos = detail::leg_positions(x.support, target_support);
    long dim = checked_dim(x.N, target_support.size(), x.norm_cap);
    int legs = static_cast<int>(target_support.size());
    // digit extraction tables for the new index space
    std::vector<int> proj(dim), restp(dim);
    for (long a = 0; a < dim; ++a) {
        long rem = a;
        int p = 0, q = 0, pw = 1, qw = 1;
        for (int l = 0; l < legs; ++l) {
            int digit = static_cast<int>(rem % x.N);
            rem /= x.N;
            if (std::find(pos.begin(), pos.end(), l) != pos.end()) {
                p += digit * pw;
                pw *= x.N;
            } else {
                q += digit * qw;
                qw *= x.N;
            }
        }
        proj[a] = p;
        restp[a] = q;
    }
    Matrix out = Matrix::Zero(dim, dim);
    for (long a = 0; a < dim; ++a)
        for (long b = 0; b < dim; ++b)
            if (restp[a] == restp[b]) out(a, b) = x.payload(proj[a], proj[b]);
    TensorOperand y = x;
    y.support = std::move(target_support);
    y.payload = std::move(out);
    return y;
}

// Sigma* X Sigma on the legs of colour c.
inline TensorOperand conjugate(const TensorOperand& x, const ColourPermutations& p, int c) {
    if (c < 0 || c >= x.assignment.colour_count())
        throw std::invalid_argument("conjugate: colour out of range");
    if (x.support != x.assignment.strings_of_colour[c])
        throw std::invalid_argument("conjugate: operand support must equal the colour strings");
    const auto& sigma = p.sigma.at(c);
    long dim = x.dim();
    if (static_cast<long>(sigma.size()) != dim)
        throw std::invalid_argument("conjugate: permutation dimension mismatch");
    Matrix out(dim, dim);
    for (long a = 0; a < dim; ++a)
        for (long b = 0; b < dim; ++b) out(a, b) = x.payload(sigma[a], sigma[b]);
    TensorOperand y = x;
    y.payload = std::move(out);
    return y;
}

inline TensorOperand delta(const TensorOperand& x) {
    TensorOperand y = x;
    y.payload = linalg::delta(x.payload);
    return y;
}

inline TensorOperand adjoint(const TensorOperand& x) {
    TensorOperand y = x;
    y.payload = x.payload.adjoint();
    return y;
}

inline TensorOperand operator*(const TensorOperand& a, const TensorOperand& b) {
    detail::require_same_space(a, b);
    auto sup = detail::union_support(a.support, b.support);
    TensorOperand la = lift(a, sup), lb = lift(b, sup);
    la.payload = la.payload * lb.payload;
    return la;
}

inline TensorOperand operator+(const TensorOperand& a, const TensorOperand& b) {
    detail::require_same_space(a, b);
    auto sup = detail::union_support(a.support, b.support);
    TensorOperand la = lift(a, sup), lb = lift(b, sup);
    la.payload = la.payload + lb.payload;
    return la;
}

inline TensorOperand operator-(const TensorOperand& a, const TensorOperand& b) {
    detail::require_same_space(a, b);
    auto sup = detail::union_support(a.support, b.support);
    TensorOperand la = lift(a, sup), lb = lift(b, sup);
    la.payload = la.payload - lb.payload;
    return la;
}

inline TensorOperand operator*(Complex s, const TensorOperand& a) {
    TensorOperand y = a;
    y.payload = s * a.payload;
    return y;
}

// Normalized quantities; all invariant under enlarging the support.
inline Complex trace_of(const TensorOperand& x) { return linalg::normalized_trace(x.payload); }
inline double hs_norm_of(const TensorOperand& x) { return linalg::hs_norm(x.payload); }
inline double op_norm_of(const TensorOperand& x) { return linalg::op_norm(x.payload); }

// ---- centered alternating words ----

struct WordFactor {
    TensorOperand lambda;  // diagonal payload required
    TensorOperand x;       // support must equal the colour's strings
};

struct WordBlock {
    int colour = 0;
    std::vector<WordFactor> factors;
};

namespace detail {

inline bool is_diagonal(const Matrix& m) {
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != Complex(0.0)) return false;
    return true;
}

}  // namespace detail

// Y_i for one block: Lambda_1 X1_conj ... Lambda_l Xl_conj.
inline TensorOperand block_operand(const WordBlock& block, const ColourPermutations& perms) {
    if (block.factors.empty()) throw std::invalid_argument("word block: no factors");
    const auto& a = block.factors.front().x.assignment;
    TensorOperand y = TensorOperand::scalar(a, block.factors.front().x.N, 1.0,
                                            block.factors.front().x.norm_cap);
    for (auto& f : block.factors) {
        if (!detail::is_diagonal(f.lambda.payload))
            throw std::invalid_argument("word block: non-diagonal weight");
        y = y * f.lambda;
        y = y * conjugate(f.x, perms, block.colour);
    }
    return y;
}

// || Delta[ (Y_1 - Delta Y_1) ... (Y_k - Delta Y_k) ] ||_2 for a reduced
// colour word. Refuses words the independence theorem says nothing about.
inline double centered_word_norm(const ColourGraph& g, const std::vector<WordBlock>& blocks,
                                 const ColourPermutations& perms) {
    if (blocks.empty()) throw std::invalid_argument("centered word: empty");
    std::vector<int> word;
    for (auto& b : blocks) {
        if (b.factors.empty()) throw std::invalid_argument("centered word: block with no factors");
        word.push_back(b.colour);
    }
    if (!digraphs::is_g_reduced(word, g))
        throw std::invalid_argument("centered word: colour word is not reduced");
    const auto& a0 = blocks.front().factors.front().x;
    TensorOperand prod = TensorOperand::scalar(a0.assignment, a0.N, 1.0, a0.norm_cap);
    for (auto& b : blocks) {
        TensorOperand y = block_operand(b, perms);
        prod = prod * (y - delta(y));
    }
    return hs_norm_of(delta(prod));
}

// ---- decay experiment ----

struct DecaySample {
    int N = 0;
    long trials = 0;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;
    double max = 0.0;
};

// Failure probability shape from the permutation concentration bound:
// 2 * sum_j exp(-N^{#S_{c_j}} eps^2 / (64 m^2 L^2)), one summand per letter.
inline double concentration_failure_bound(const StringAssignment& a,
                                          const std::vector<int>& word_colours, int N,
                                          double eps, double lipschitz) {
    double m = static_cast<double>(word_colours.size());
    double total = 0.0;
    for (int c : word_colours) {
        if (c < 0 || c >= a.colour_count())
            throw std::invalid_argument("concentration bound: colour out of range");
        double dim = std::pow(static_cast<double>(N),
                              static_cast<double>(a.strings_of_colour[c].size()));
        total += 2.0 * std::exp(-dim * eps * eps / (64.0 * m * m * lipschitz * lipschitz));
    }
    return total;
}

// Smallest odd trial count whose median is wrong with probability below
// delta when each trial fails with probability p (binomial tail, exact).
inline long suggested_trials(double p, double delta, long cap = 100001) {
    if (p < 0.0 || delta <= 0.0) throw std::invalid_argument("suggested_trials: bad inputs");
    if (p >= 0.5) return cap;
    for (long t = 1; t <= cap; t += 2) {
        // P(Binomial(t, p) >= (t+1)/2)
        double tail = 0.0, logp = std::log(std::max(p, 1e-300)),
               logq = std::log1p(-p);
        double logc = 0.0;  // log C(t, 0)
        for (long k = 0; k <= t; ++k) {
            if (2 * k + 1 >= t + 1)
                tail += std::exp(logc + k * logp + (t - k) * logq);
            logc += std::log(static_cast<double>(t - k)) -
                    std::log(static_cast<double>(k + 1));
        }
        if (tail <= delta) return t;
    }
    return cap;
}

struct ExperimentWordFactor {
    int colour = 0;
    int generator = 0;  // index into the colour's generator list
};

struct IndependenceConfig {
    ColourGraph graph;
    StringAssignment assignment;                   // empty string_count: auto-built
    std::map<int, std::vector<Matrix>> generators; // per colour, common square dim per colour
    std::vector<std::vector<ExperimentWordFactor>> words;
    std::vector<int> n_schedule;
    long trials = 0;  // 0: derive from the concentration bound
    std::uint64_t seed = 0;
    long norm_cap = kDefaultNormCap;
    double norm_bound = 0.0;  // optional declared R; > 0 enables per-trial checks
};

namespace detail {

// pad a d x d matrix to dim x dim by tensoring an identity on the right leg
inline Matrix pad_to(const Matrix& x, long dim) {
    long d = x.rows();
    if (dim % d != 0) throw std::invalid_argument("microstate dimension does not divide N");
    return linalg::kron(x, Matrix::Identity(dim / d, dim / d));
}

}  // namespace detail

struct DecayReport {
    std::vector<int> word_colours;
    std::vector<DecaySample> samples;  // one per N in the schedule
};

// Median decay of centered alternating words under independent permutation
// draws. Deterministic in (config, seed): trial t of word w at dimension N
// draws its permutations from the counter stream keyed (seed, trial) with N
// folded into the per-colour key.
inline std::vector<DecayReport> independence_experiment(const IndependenceConfig& cfg) {
    StringAssignment a = cfg.assignment;
    if (a.string_count == 0) a = digraphs::build_string_assignment(cfg.graph);
    std::string why;
    if (!digraphs::is_valid_assignment(a, cfg.graph, &why))
        throw std::invalid_argument("independence experiment: " + why);
    std::vector<DecayReport> reports;
    for (auto& word : cfg.words) {
        if (word.empty()) throw std::invalid_argument("independence experiment: empty word");
        DecayReport rep;
        for (auto& f : word) rep.word_colours.push_back(f.colour);
        for (int N : cfg.n_schedule) {
            long trials = cfg.trials;
            if (trials <= 0) {
                double p = concentration_failure_bound(a, rep.word_colours, N, 0.25, 1.0);
                trials = std::max<long>(21, suggested_trials(std::min(p, 0.49), 1e-3, 501));
            }
            std::vector<double> values;
            values.reserve(trials);
            for (long trial = 0; trial < trials; ++trial) {
                auto perms = ColourPermutations::draw(a, N, cfg.seed,
                                                      static_cast<std::uint64_t>(trial));
                std::vector<WordBlock> blocks;
                for (auto& f : word) {
                    auto it = cfg.generators.find(f.colour);
                    if (it == cfg.generators.end() || f.generator < 0 ||
                        f.generator >= static_cast<int>(it->second.size()))
                        throw std::invalid_argument("independence experiment: unknown generator");
                    long dc = indexing::pow_int(N, static_cast<int>(
                                                       a.strings_of_colour[f.colour].size()));
                    Matrix padded = detail::pad_to(it->second[f.generator], dc);
                    WordBlock b;
                    b.colour = f.colour;
                    WordFactor wf{TensorOperand::scalar(a, N, 1.0, cfg.norm_cap),
                                  TensorOperand::make(a, N, a.strings_of_colour[f.colour],
                                                      std::move(padded), cfg.norm_cap)};
                    if (cfg.norm_bound > 0.0 && op_norm_of(wf.x) > cfg.norm_bound + 1e-9)
                        throw std::invalid_argument(
                            "independence experiment: generator exceeds the declared norm bound");
                    b.factors.push_back(std::move(wf));
                    blocks.push_back(std::move(b));
                }
                double v = centered_word_norm(cfg.graph, blocks, perms);
                if (cfg.norm_bound > 0.0) {
                    double cap = 2.0;  // each centered factor has norm <= 2R, R normalized out
                    for (std::size_t i = 0; i < word.size(); ++i) cap *= 2.0 * cfg.norm_bound;
                    if (v > cap)
                        throw std::runtime_error("independence experiment: norm invariant broke");
                }
                values.push_back(v);
            }
            DecaySample s;
            s.N = N;
            s.trials = trials;
            for (double v : values) {
                s.mean += v;
                s.max = std::max(s.max, v);
            }
            s.mean /= static_cast<double>(trials);
            for (double v : values) s.std_dev += (v - s.mean) * (v - s.mean);
            s.std_dev = std::sqrt(s.std_dev / static_cast<double>(trials));
            std::sort(values.begin(), values.end());
            s.median = (trials % 2) ? values[trials / 2]
                                    : 0.5 * (values[trials / 2 - 1] + values[trials / 2]);
            rep.samples.push_back(s);
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

// ---- microstate transport ----

using MicrostateSource = std::function<std::vector<Matrix>(int)>;

struct GraphProductMicrostates {
    int N = 0;  // common per-string dimension, the product of the part dimensions
    std::map<int, std::vector<TensorOperand>> operands;
};

// Lifts each colour's microstate tuple into the permutation model: pad every
// part to the common dimension, place it on the colour's strings and
// conjugate by that colour's permutation. Single-colour moments are
// preserved exactly; the joint law approximates the graph product.
inline GraphProductMicrostates graph_product_microstates(
    const ColourGraph& g, const StringAssignment& a,
    const std::map<int, MicrostateSource>& sources, int k, std::uint64_t seed,
    std::uint64_t trial = 0, long norm_cap = kDefaultNormCap) {
    std::string why;
    if (!digraphs::is_valid_assignment(a, g, &why))
        throw std::invalid_argument("microstate transport: " + why);
    std::map<int, std::vector<Matrix>> mats;
    long N = 1;
    for (int c = 0; c < g.m; ++c) {
        auto it = sources.find(c);
        if (it == sources.end())
            throw std::invalid_argument("microstate transport: missing source for a colour");
        auto tuple = it->second(k);
        long d = tuple.empty() ? 1 : tuple.front().rows();
        for (auto& x : tuple)
            if (x.rows() != x.cols() || x.rows() != d)
                throw std::invalid_argument("microstate transport: ragged tuple dimensions");
        N *= std::max<long>(d, 1);
        mats.emplace(c, std::move(tuple));
    }
    if (N > norm_cap)
        throw ResourceError("microstate transport: common dimension exceeds the cap");
    GraphProductMicrostates out;
    out.N = static_cast<int>(N);
    auto perms = ColourPermutations::draw(a, out.N, seed, trial);
    for (auto& [c, tuple] : mats) {
        std::vector<TensorOperand> ops;
        for (auto& x : tuple) {
            Matrix padded = detail::pad_to(x, out.N);
            // place on the first string of the colour, identity on the rest
            TensorOperand base = TensorOperand::make(a, out.N, {a.strings_of_colour[c].front()},
                                                     std::move(padded), norm_cap);
            ops.push_back(conjugate(lift(base, a.strings_of_colour[c]), perms, c));
        }
        out.operands.emplace(c, std::move(ops));
    }
    return out;
}

}  // namespace permtraffic::permmodel
