#pragma once

// Traffic moments of labelled test digraphs: plain and injective traces,
// the random string model driven by per-colour permutations, kernel-wise
// moment contributions and their exact expectations, asymptotic leading
// terms, the two-edge-connectivity norm bound, and the glued-cycle graphs
// behind centered product norms.

#include <map>
#include <vector>

#include "permtraffic/digraphs.hpp"
#include "permtraffic/errors.hpp"
#include "permtraffic/indexing.hpp"
#include "permtraffic/linalg.hpp"

namespace permtraffic::traffic {

using combinat::Partition;
using digraphs::StringAssignment;
using digraphs::TestDigraph;
using indexing::ColourPermutations;
using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

namespace detail {

// Sum over vertex index maps of the product of loop and edge factors,
// assigning vertices one component at a time in breadth-first order and
// pruning branches as soon as a factor vanishes. entry(e, row, col) is the
// matrix entry with row = index of the edge's target. Maps are restricted
// to injective ones when asked.
template <class EntryFn, class LoopFn>
Complex map_sum(const TestDigraph& t, int dim, EntryFn&& entry, LoopFn&& loop, bool injective) {
    int n = t.n;
    if (n == 0) return 1.0;
    if (injective && n > dim) return 0.0;
    // breadth-first vertex order
    std::vector<int> order, pos(n, -1);
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < static_cast<int>(t.edges.size()); ++i) {
        adj[t.edges[i].src].push_back(i);
        adj[t.edges[i].dst].push_back(i);
    }
    for (int root = 0; root < n; ++root) {
        if (pos[root] >= 0) continue;
        std::vector<int> queue{root};
        pos[root] = static_cast<int>(order.size());
        order.push_back(root);
        for (std::size_t q = 0; q < queue.size(); ++q) {
            int v = queue[q];
            for (int ei : adj[v]) {
                auto& e = t.edges[ei];
                int w = (e.src == v) ? e.dst : e.src;
                if (pos[w] < 0) {
                    pos[w] = static_cast<int>(order.size());
                    order.push_back(w);
                    queue.push_back(w);
                }
            }
        }
    }
    // edges become evaluable once the later endpoint is placed
    std::vector<std::vector<int>> ready(n);
    for (int i = 0; i < static_cast<int>(t.edges.size()); ++i) {
        auto& e = t.edges[i];
        ready[std::max(pos[e.src], pos[e.dst])].push_back(i);
    }
    std::vector<int> idx(n, 0);
    std::vector<char> used(dim, 0);
    Complex total = 0.0;
    auto rec = [&](auto&& self, int step, Complex weight) -> void {
        if (step == n) {
            total += weight;
            return;
        }
        int v = order[step];
        for (int x = 0; x < dim; ++x) {
            if (injective && used[x]) continue;
            Complex w = weight;
            for (auto& f : t.loops[v]) {
                w *= loop(f, x);
                if (w == 0.0) break;
            }
            if (w != 0.0) {
                idx[v] = x;
                for (int ei : ready[step]) {
                    auto& e = t.edges[ei];
                    w *= entry(ei, idx[e.dst], idx[e.src]);
                    if (w == 0.0) break;
                }
            }
            if (w == 0.0) continue;
            if (injective) used[x] = 1;
            self(self, step + 1, w);
            if (injective) used[x] = 0;
        }
    };
    rec(rec, 0, Complex(1.0));
    return total;
}

inline double pow_d(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    for (int i = 0; i > exp; --i) r /= base;
    return r;
}

}  // namespace detail

// tau_dim(T): sum over all vertex index maps, normalized by
// dim^(#components). Labels map edge and loop handles to matrices in
// M_dim; starred occurrences use the adjoint.
inline Complex trace_tau(const TestDigraph& t, const std::map<int, Matrix>& labels, int dim,
                         bool injective = false) {
    auto entry = [&](int ei, int row, int col) -> Complex {
        auto& e = t.edges[ei];
        const Matrix& x = labels.at(e.label);
        return e.star ? std::conj(x(col, row)) : x(row, col);
    };
    auto loop = [&](const digraphs::LoopFactor& f, int x) -> Complex {
        const Matrix& m = labels.at(f.label);
        return f.star ? std::conj(m(x, x)) : m(x, x);
    };
    Complex raw = detail::map_sum(t, dim, entry, loop, injective);
    return raw * detail::pow_d(static_cast<double>(dim), -digraphs::component_count(t));
}

inline Complex trace_tau_injective(const TestDigraph& t, const std::map<int, Matrix>& labels,
                                   int dim) {
    return trace_tau(t, labels, dim, true);
}

// The random string model: a per-string dimension N, edge payloads living
// on the strings of their colour (colour-local mixed-radix encoding), and
// diagonal loop payloads over the whole index space [N]^S.
struct StringModel {
    StringAssignment assignment;
    int N = 0;
    std::map<int, Matrix> edge_payload;  // label handle -> M_{N^{#S_c}}
    std::map<int, Vector> loop_payload;  // label handle -> diagonal of length N^{#S}

    int ambient_dim() const { return indexing::pow_int(N, assignment.string_count); }

    int colour_dim(int c) const {
        return indexing::pow_int(N, static_cast<int>(assignment.strings_of_colour[c].size()));
    }
};

namespace detail {

struct ModelContext {
    const TestDigraph* t;
    const StringModel* m;
    const ColourPermutations* p;
    std::vector<std::vector<int>> digits;      // composite code -> per-string digits
    std::vector<std::vector<int>> off_strings; // per colour: strings not in S_c

    ModelContext(const TestDigraph& t_, const StringModel& m_, const ColourPermutations& p_)
        : t(&t_), m(&m_), p(&p_) {
        int S = m_.assignment.string_count;
        int dim = m_.ambient_dim();
        digits.resize(dim);
        for (int code = 0; code < dim; ++code) digits[code] = indexing::decode(code, S, m_.N);
        off_strings.resize(m_.assignment.colour_count());
        for (int c = 0; c < m_.assignment.colour_count(); ++c) {
            const auto& sc = m_.assignment.strings_of_colour[c];
            for (int s = 0; s < S; ++s)
                if (std::find(sc.begin(), sc.end(), s) == sc.end()) off_strings[c].push_back(s);
        }
        if (static_cast<int>(p_.sigma.size()) != m_.assignment.colour_count())
            throw std::invalid_argument("model: permutation bundle size mismatch");
    }

    // Entry of the conjugated, identity-padded edge matrix.
    Complex entry(int ei, int row, int col) const {
        auto& e = t->edges[ei];
        const auto& dr = digits[row];
        const auto& dc = digits[col];
        for (int s : off_strings[e.colour])
            if (dr[s] != dc[s]) return 0.0;
        const auto& sc = m->assignment.strings_of_colour[e.colour];
        int a = indexing::encode_on(dr, sc, m->N);
        int b = indexing::encode_on(dc, sc, m->N);
        const auto& sig = p->sigma[e.colour];
        const Matrix& x = m->edge_payload.at(e.label);
        return e.star ? std::conj(x(sig[b], sig[a])) : x(sig[a], sig[b]);
    }

    Complex loop(const digraphs::LoopFactor& f, int code) const {
        Complex v = m->loop_payload.at(f.label)(code);
        return f.star ? std::conj(v) : v;
    }
};

}  // namespace detail

// tau over the full index space with the realized (conjugated) labels.
inline Complex model_trace(const TestDigraph& t, const StringModel& m,
                           const ColourPermutations& p, bool injective = false) {
    detail::ModelContext ctx(t, m, p);
    Complex raw = detail::map_sum(
        t, m.ambient_dim(), [&](int ei, int r, int c) { return ctx.entry(ei, r, c); },
        [&](const digraphs::LoopFactor& f, int x) { return ctx.loop(f, x); }, injective);
    return raw * detail::pow_d(static_cast<double>(m.ambient_dim()),
                               -digraphs::component_count(t));
}

// Number of index maps whose per-string kernels equal pi exactly:
// prod_s N(N-1)...(N - #pi_s + 1).
inline double kernel_assignment_count(const std::vector<Partition>& pi, int N) {
    double count = 1.0;
    for (auto& p : pi)
        for (int t = 0; t < p.block_count(); ++t) count *= static_cast<double>(N - t);
    return count < 0 ? 0.0 : count;
}

namespace detail {

// Enumerates, string by string, the injective labelings of the blocks of
// pi_s into [N], and hands each complete digit assignment to the sink.
template <class Sink>
void for_each_kernel_assignment(const std::vector<Partition>& pi, int N, Sink&& sink) {
    int S = static_cast<int>(pi.size());
    for (auto& p : pi)
        if (p.block_count() > N) return;
    // labels[s][b] = digit of block b of pi_s
    std::vector<std::vector<int>> labels(S);
    auto rec = [&](auto&& self, int s) -> void {
        if (s == S) {
            sink(labels);
            return;
        }
        int k = pi[s].block_count();
        labels[s].assign(k, -1);
        std::vector<char> taken(N, 0);
        auto blocks = [&](auto&& inner, int b) -> void {
            if (b == k) {
                self(self, s + 1);
                return;
            }
            for (int x = 0; x < N; ++x) {
                if (taken[x]) continue;
                taken[x] = 1;
                labels[s][b] = x;
                inner(inner, b + 1);
                taken[x] = 0;
            }
        };
        blocks(blocks, 0);
    };
    rec(rec, 0);
}

}  // namespace detail

// Contribution to tau of the index maps with per-string kernels exactly pi,
// for one realization of the permutations. The delta factors inside the
// padded edge matrices make this an exact zero whenever some pi_s fails to
// sit above the floor rho_s.
inline Complex gamma_contribution(const TestDigraph& t, const StringModel& m,
                                  const ColourPermutations& p, const std::vector<Partition>& pi) {
    int S = m.assignment.string_count;
    if (static_cast<int>(pi.size()) != S)
        throw std::invalid_argument("gamma: one partition per string required");
    for (auto& q : pi)
        if (q.size() != t.n) throw std::invalid_argument("gamma: partition of V(T) required");
    detail::ModelContext ctx(t, m, p);
    Complex total = 0.0;
    std::vector<int> all(S);
    for (int s = 0; s < S; ++s) all[s] = s;
    detail::for_each_kernel_assignment(pi, m.N, [&](const std::vector<std::vector<int>>& labels) {
        // composite index per vertex
        Complex w = 1.0;
        std::vector<int> code(t.n);
        std::vector<int> dig(S);
        for (int v = 0; v < t.n; ++v) {
            for (int s = 0; s < S; ++s) dig[s] = labels[s][pi[s].block_of(v)];
            code[v] = indexing::encode_on(dig, all, m.N);
        }
        for (int v = 0; v < t.n && w != 0.0; ++v)
            for (auto& f : t.loops[v]) {
                w *= ctx.loop(f, code[v]);
                if (w == 0.0) break;
            }
        for (int ei = 0; ei < static_cast<int>(t.edges.size()) && w != 0.0; ++ei)
            w *= ctx.entry(ei, code[t.edges[ei].dst], code[t.edges[ei].src]);
        total += w;
    });
    return total * detail::pow_d(static_cast<double>(m.ambient_dim()),
                                 -digraphs::component_count(t));
}

// N^(-sum_s #pi_s) * sum over kernel assignments of the loop weights alone.
// Bounded by R^(#V) for sup-norm-R diagonals.
inline Complex lambda_weight(const TestDigraph& t, const StringModel& m,
                             const std::vector<Partition>& pi) {
    int S = m.assignment.string_count;
    if (static_cast<int>(pi.size()) != S)
        throw std::invalid_argument("lambda_weight: one partition per string required");
    Complex total = 0.0;
    int exp = 0;
    for (auto& q : pi) exp += q.block_count();
    detail::for_each_kernel_assignment(pi, m.N, [&](const std::vector<std::vector<int>>& labels) {
        Complex w = 1.0;
        std::vector<int> dig(S);
        std::vector<int> all(S);
        for (int s = 0; s < S; ++s) all[s] = s;
        for (int v = 0; v < t.n && w != 0.0; ++v) {
            if (t.loops[v].empty()) continue;
            for (int s = 0; s < S; ++s) dig[s] = labels[s][pi[s].block_of(v)];
            int code = indexing::encode_on(dig, all, m.N);
            for (auto& f : t.loops[v]) {
                Complex x = m.loop_payload.at(f.label)(code);
                w *= f.star ? std::conj(x) : x;
                if (w == 0.0) break;
            }
        }
        total += w;
    });
    return total * detail::pow_d(static_cast<double>(m.N), -exp);
}

// Exact expectation of gamma_contribution over independent uniform
// permutations, for connected T and pi above the floor (zero below it):
// N^(sum_s(#pi_s - 1)) * lambda * prod_c [ tau_inj(T_{pi,c}) D_c^{#comp} /
// (D_c)_(#V) ].
inline Complex expected_gamma(const TestDigraph& t, const StringModel& m,
                              const std::vector<Partition>& pi) {
    if (digraphs::component_count(t) != 1)
        throw std::invalid_argument("expected_gamma: connected digraph required");
    int S = m.assignment.string_count;
    if (static_cast<int>(pi.size()) != S)
        throw std::invalid_argument("expected_gamma: one partition per string required");
    for (int s = 0; s < S; ++s) {
        if (pi[s].size() != t.n)
            throw std::invalid_argument("expected_gamma: partition of V(T) required");
        if (!digraphs::rho(t, m.assignment, s).leq(pi[s])) return 0.0;
        if (pi[s].block_count() > m.N) return 0.0;
    }
    int exp = -S;
    for (auto& q : pi) exp += q.block_count();
    Complex value = detail::pow_d(static_cast<double>(m.N), exp) * lambda_weight(t, m, pi);
    for (int c = 0; c < m.assignment.colour_count() && value != 0.0; ++c) {
        double D = static_cast<double>(m.colour_dim(c));
        auto tc = digraphs::strip_loops(digraphs::colour_quotient(t, m.assignment, pi, c));
        double falling = 1.0;
        for (int i = 0; i < tc.n; ++i) falling *= (D - i);
        if (falling <= 0.0) return 0.0;  // more blocks than index values
        int comp = digraphs::component_count(tc);
        Complex tinj = trace_tau_injective(tc, m.edge_payload, static_cast<int>(D));
        value *= tinj * detail::pow_d(D, comp) / falling;
    }
    return value;
}

struct MomentReport {
    Complex exact = 0.0;        // sum of expected_gamma over all pi >= rho
    Complex leading = 0.0;      // sum of lambda * prod tau_inj over all-tree tuples
    long tuple_count = 0;
    long tree_tuple_count = 0;
    bool two_edge_connected = false;  // when set, exact = leading + O(1/N)
};

namespace detail {

template <class Fn>
void for_each_tuple_above(const std::vector<Partition>& rho, Fn&& fn) {
    int S = static_cast<int>(rho.size());
    std::vector<Partition> pi(S);
    auto rec = [&](auto&& self, int s) -> void {
        if (s == S) {
            fn(pi);
            return;
        }
        combinat::AboveStream st(rho[s]);
        while (st.next(pi[s])) self(self, s + 1);
    };
    rec(rec, 0);
}

}  // namespace detail

// Exact expected moment by kernel summation, with the all-tree leading
// part reported alongside. For two-edge-connected T the remainder
// exact - leading is O(1/N).
inline MomentReport expected_trace(const TestDigraph& t, const StringModel& m) {
    if (digraphs::component_count(t) != 1)
        throw std::invalid_argument("expected_trace: connected digraph required");
    auto floors = digraphs::rho_tuple(t, m.assignment);
    MomentReport rep;
    rep.two_edge_connected = digraphs::two_edge_connected(t).two_edge_connected;
    detail::for_each_tuple_above(floors, [&](const std::vector<Partition>& pi) {
        ++rep.tuple_count;
        rep.exact += expected_gamma(t, m, pi);
        bool all_trees = true;
        for (int s = 0; s < m.assignment.string_count && all_trees; ++s)
            all_trees = digraphs::is_tree(digraphs::gcc(t, m.assignment, pi, s));
        if (!all_trees) return;
        ++rep.tree_tuple_count;
        Complex term = lambda_weight(t, m, pi);
        for (int c = 0; c < m.assignment.colour_count() && term != 0.0; ++c) {
            auto tc = digraphs::strip_loops(digraphs::colour_quotient(t, m.assignment, pi, c));
            term *= trace_tau_injective(tc, m.edge_payload, m.colour_dim(c));
        }
        rep.leading += term;
    });
    return rep;
}

// Average of model_trace over every tuple of permutations; the reference
// oracle for expected_trace at tiny sizes.
inline Complex exhaustive_expected_trace(const TestDigraph& t, const StringModel& m,
                                         double cap = 1e7) {
    int C = m.assignment.colour_count();
    double total = 1.0;
    for (int c = 0; c < C; ++c) {
        double f = 1.0;
        for (int i = 2; i <= m.colour_dim(c); ++i) f *= i;
        total *= f;
    }
    if (total > cap) throw ResourceError("exhaustive average over permutation tuples too large");
    ColourPermutations p = ColourPermutations::identity(m.assignment, m.N);
    Complex sum = 0.0;
    long count = 0;
    auto rec = [&](auto&& self, int c) -> void {
        if (c == C) {
            sum += model_trace(t, m, p);
            ++count;
            return;
        }
        std::sort(p.sigma[c].begin(), p.sigma[c].end());
        do {
            self(self, c + 1);
        } while (std::next_permutation(p.sigma[c].begin(), p.sigma[c].end()));
    };
    rec(rec, 0);
    return sum / static_cast<double>(count);
}

struct MonteCarloEstimate {
    Complex mean = 0.0;
    double std_error = 0.0;  // larger of the per-component standard errors
    long trials = 0;
};

inline MonteCarloEstimate mc_expected_trace(const TestDigraph& t, const StringModel& m,
                                            long trials, std::uint64_t seed) {
    if (trials <= 0) throw std::invalid_argument("mc_expected_trace: positive trials required");
    MonteCarloEstimate est;
    est.trials = trials;
    Complex sum = 0.0;
    double sum_re2 = 0.0, sum_im2 = 0.0;
    for (long i = 0; i < trials; ++i) {
        auto p = ColourPermutations::draw(m.assignment, m.N, seed, static_cast<std::uint64_t>(i));
        Complex v = model_trace(t, m, p);
        sum += v;
        sum_re2 += v.real() * v.real();
        sum_im2 += v.imag() * v.imag();
    }
    est.mean = sum / static_cast<double>(trials);
    double n = static_cast<double>(trials);
    double var_re = std::max(0.0, sum_re2 / n - est.mean.real() * est.mean.real());
    double var_im = std::max(0.0, sum_im2 / n - est.mean.imag() * est.mean.imag());
    est.std_error = std::sqrt(std::max(var_re, var_im) / n);
    return est;
}

// Twice the N-exponent governing the kernel term at pi:
// 2*sum_s(#pi_s - 1) + sum_c #S_c*(f(T_{pi,c}) - 2*#V(T_{pi,c})).
// For two-edge-connected T this is <= 0, with equality exactly when every
// GCC(T,pi,s) is a tree; in that case f(T_{pi,c})/2 = #Comp(T_{pi,c}).
inline int moment_exponent_doubled(const TestDigraph& t, const StringAssignment& a,
                                   const std::vector<Partition>& pi) {
    int v = 0;
    for (int s = 0; s < a.string_count; ++s) v += 2 * (pi[s].block_count() - 1);
    for (int c = 0; c < a.colour_count(); ++c) {
        auto tc = digraphs::strip_loops(digraphs::colour_quotient(t, a, pi, c));
        v += static_cast<int>(a.strings_of_colour[c].size()) *
             (digraphs::forest_leaf_count(tc) - 2 * tc.n);
    }
    return v;
}

// N^(f(T)/2 - #components) * prod of label norms: |tau_N(T)| is bounded by
// a T-dependent constant times this.
inline double mingo_speicher_bound(const TestDigraph& t, const std::map<int, double>& norms,
                                   int dim) {
    auto rep = digraphs::two_edge_connected(t);
    double v = std::pow(static_cast<double>(dim),
                        0.5 * rep.leaf_count - digraphs::component_count(t));
    for (auto& e : t.edges) v *= norms.at(e.label);
    return v;
}

// ---- glued-cycle graphs for centered product norms ----

struct GluedWordFactor {
    int loop_label = -1;  // -1: no diagonal factor at this position
    int edge_label = 0;
};

struct GluedWord {
    int colour = 0;
    std::vector<GluedWordFactor> factors;  // length l(i) >= 1
};

// The two cycles of ||Delta[ prod_i (Y_i - Delta Y_i) ]||_2^2: the word
// cycle through Y_1..Y_k and its adjoint cycle, sharing the base vertex.
// base_unprimed[i] / base_primed[i] are the heads u_{i,1} and u'_{i,1};
// chains glue head to tail cyclically.
struct GluedCycleGraph {
    TestDigraph graph;
    int k = 0;
    std::vector<int> word;           // colour word c_1..c_k
    std::vector<int> base_unprimed;  // u_{i,1}
    std::vector<int> base_primed;    // u'_{i,1}
};

inline GluedCycleGraph build_centered_product_graph(const std::vector<GluedWord>& words,
                                                    int colour_count) {
    int k = static_cast<int>(words.size());
    if (k == 0) throw std::invalid_argument("glued cycles: empty word");
    std::vector<int> len(k), offset(k, 0);
    int L = 0;
    for (int i = 0; i < k; ++i) {
        len[i] = static_cast<int>(words[i].factors.size());
        if (len[i] == 0) throw std::invalid_argument("glued cycles: empty block");
        offset[i] = L;
        L += len[i];
    }
    GluedCycleGraph g;
    g.k = k;
    for (auto& w : words) g.word.push_back(w.colour);
    g.graph.n = 2 * L - 1;
    g.graph.colour_count = colour_count;
    g.graph.loops.assign(g.graph.n, {});
    // unprimed ids: u_{i,j} = offset_i + j - 1; u_{i,l+1} = u_{i+1,1}
    auto uid = [&](int i, int j) {
        if (j == len[i] + 1) return offset[(i + 1) % k];
        return offset[i] + j - 1;
    };
    // primed ids pack into L..2L-2, except the shared base u'_{1,1} = u_{1,1}
    auto pid = [&](int i, int j) {
        if (j == len[i] + 1) {
            i = (i + 1) % k;
            j = 1;
        }
        if (i == 0 && j == 1) return 0;
        return L + offset[i] + j - 2;
    };
    for (int i = 0; i < k; ++i) {
        int c = words[i].colour;
        for (int j = 1; j <= len[i]; ++j) {
            auto& f = words[i].factors[j - 1];
            // X_{i,j}: u_{i,j+1} -> u_{i,j}
            g.graph.add_edge(uid(i, j + 1), uid(i, j), c, f.edge_label, false);
            if (f.loop_label >= 0) g.graph.add_loop(uid(i, j), f.loop_label, false);
        }
        for (int j = 1; j <= len[i]; ++j) {
            auto& f = words[i].factors[j - 1];
            // X*_{i,j}: u'_{i,j} -> u'_{i,j+1}
            g.graph.add_edge(pid(i, j), pid(i, j + 1), c, f.edge_label, true);
            if (f.loop_label >= 0) g.graph.add_loop(pid(i, j), f.loop_label, true);
        }
        g.base_unprimed.push_back(uid(i, 1));
        g.base_primed.push_back(pid(i, 1));
    }
    return g;
}

// Vertex partition identifying, for each chosen block, the head of the
// chain with the head of the next chain (the Delta substitution).
inline Partition subset_partition(const GluedCycleGraph& g, std::uint32_t pos_mask,
                                  std::uint32_t neg_mask) {
    std::vector<int> parent(g.graph.n);
    for (int v = 0; v < g.graph.n; ++v) parent[v] = v;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < g.k; ++i) {
        if (pos_mask & (1u << i))
            parent[find(g.base_unprimed[i])] = find(g.base_unprimed[(i + 1) % g.k]);
        if (neg_mask & (1u << i))
            parent[find(g.base_primed[i])] = find(g.base_primed[(i + 1) % g.k]);
    }
    std::vector<int> lab(g.graph.n);
    for (int v = 0; v < g.graph.n; ++v) lab[v] = find(v);
    return Partition::from_labels(lab);
}

// sum over I of (-1)^|I| tau(T_I) for one permutation draw; equals the
// squared 2-norm of the diagonal part of the centered product.
inline Complex centered_norm_expansion(const GluedCycleGraph& g, const StringModel& m,
                                       const ColourPermutations& p) {
    if (g.k > 15) throw ResourceError("centered expansion: word too long");
    Complex total = 0.0;
    for (std::uint32_t pos = 0; pos < (1u << g.k); ++pos)
        for (std::uint32_t neg = 0; neg < (1u << g.k); ++neg) {
            int bits = __builtin_popcount(pos) + __builtin_popcount(neg);
            auto q = quotient(g.graph, subset_partition(g, pos, neg));
            Complex v = model_trace(q, m, p);
            total += (bits % 2 ? -v : v);
        }
    return total;
}

// J_pi: the positive i whose consecutive unprimed heads are merged by the
// meet of all pi_s, and the negative i for the primed heads (1-based,
// cyclic).
inline std::vector<int> j_set(const GluedCycleGraph& g, const std::vector<Partition>& pi) {
    if (pi.empty()) throw std::invalid_argument("j_set: empty partition tuple");
    Partition meet = pi[0];
    for (std::size_t s = 1; s < pi.size(); ++s) meet = meet.meet(pi[s]);
    std::vector<int> out;
    for (int i = 0; i < g.k; ++i)
        if (meet.same_block(g.base_unprimed[i], g.base_unprimed[(i + 1) % g.k]))
            out.push_back(i + 1);
    for (int i = 0; i < g.k; ++i)
        if (meet.same_block(g.base_primed[i], g.base_primed[(i + 1) % g.k]))
            out.push_back(-(i + 1));
    return out;
}

// For a reduced colour word, no tuple above the floor can have every
// colour-component graph a tree and an empty J. Enumerates and returns
// true when the exclusion holds; counters report the search size.
inline bool check_inconsistency(const GluedCycleGraph& g, const StringAssignment& a,
                                const digraphs::ColourGraph& cg, long* tuples = nullptr,
                                long* tree_tuples = nullptr) {
    if (!digraphs::is_g_reduced(g.word, cg))
        throw std::invalid_argument("check_inconsistency: reduced colour word required");
    auto floors = digraphs::rho_tuple(g.graph, a);
    bool ok = true;
    long n_tuples = 0, n_trees = 0;
    detail::for_each_tuple_above(floors, [&](const std::vector<Partition>& pi) {
        ++n_tuples;
        if (!ok) return;
        for (int s = 0; s < a.string_count; ++s)
            if (!digraphs::is_tree(digraphs::gcc(g.graph, a, pi, s))) return;
        ++n_trees;
        if (j_set(g, pi).empty()) ok = false;
    });
    if (tuples) *tuples = n_tuples;
    if (tree_tuples) *tree_tuples = n_trees;
    return ok;
}

}  // namespace permtraffic::traffic
