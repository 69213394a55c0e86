#pragma once

// Finite multidigraphs with coloured, labelled edges and diagonal loop
// decorations, colour graphs with string assignments, and the derived
// combinatorial objects: restrictions, quotients, component partitions,
// the floors rho_s, per-colour and per-string quotients, the bipartite
// colour-component graphs, and two-edge-connectivity reports.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "permtraffic/combinat.hpp"

namespace permtraffic::digraphs {

using combinat::Partition;

// Simple undirected graph on colours 0..m-1; edges mark commuting pairs.
struct ColourGraph {
    int m = 0;
    std::set<std::pair<int, int>> edges;  // normalized a < b
    std::vector<std::string> names;       // optional, size m when present

    static ColourGraph make(int m, const std::vector<std::pair<int, int>>& es,
                            std::vector<std::string> names = {}) {
        ColourGraph g;
        g.m = m;
        if (m < 0) throw std::invalid_argument("colour graph: negative order");
        if (!names.empty() && static_cast<int>(names.size()) != m)
            throw std::invalid_argument("colour graph: name count mismatch");
        g.names = std::move(names);
        for (auto [a, b] : es) {
            if (a < 0 || a >= m || b < 0 || b >= m)
                throw std::invalid_argument("colour graph: edge endpoint out of range");
            if (a == b) throw std::invalid_argument("colour graph: self-loop");
            g.edges.insert({std::min(a, b), std::max(a, b)});
        }
        return g;
    }

    bool adjacent(int a, int b) const {
        if (a == b) return false;
        return edges.count({std::min(a, b), std::max(a, b)}) > 0;
    }
};

// Strings S_c per colour over a common string set {0..string_count-1}.
// Valid when S_c is nonempty and S_c meets S_c' exactly for non-adjacent
// pairs.
struct StringAssignment {
    int string_count = 0;
    std::vector<std::vector<int>> strings_of_colour;  // sorted, unique

    int colour_count() const { return static_cast<int>(strings_of_colour.size()); }

    std::vector<int> colours_of_string(int s) const {
        std::vector<int> out;
        for (int c = 0; c < colour_count(); ++c)
            for (int t : strings_of_colour[c])
                if (t == s) { out.push_back(c); break; }
        return out;
    }
};

inline bool is_valid_assignment(const StringAssignment& a, const ColourGraph& g,
                                std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (a.colour_count() != g.m) return fail("assignment: colour count mismatch");
    for (int c = 0; c < g.m; ++c) {
        auto s = a.strings_of_colour[c];
        if (s.empty()) return fail("assignment: empty string set for colour " + std::to_string(c));
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 0 || s[i] >= a.string_count)
                return fail("assignment: string id out of range");
            if (i && s[i] <= s[i - 1]) return fail("assignment: strings not sorted unique");
        }
    }
    for (int c = 0; c < g.m; ++c)
        for (int d = c + 1; d < g.m; ++d) {
            bool disjoint = true;
            for (int s : a.strings_of_colour[c])
                for (int t : a.strings_of_colour[d])
                    if (s == t) disjoint = false;
            if (disjoint != g.adjacent(c, d))
                return fail("assignment: colours " + std::to_string(c) + "," + std::to_string(d) +
                            (disjoint ? " disjoint but not adjacent" : " overlap but adjacent"));
        }
    return true;
}

// One private string per colour plus one shared string per non-adjacent
// pair. Private strings come first (by colour), then shared strings in
// lexicographic pair order.
inline StringAssignment build_string_assignment(const ColourGraph& g) {
    StringAssignment a;
    a.strings_of_colour.assign(g.m, {});
    for (int c = 0; c < g.m; ++c) a.strings_of_colour[c].push_back(c);
    int next = g.m;
    for (int c = 0; c < g.m; ++c)
        for (int d = c + 1; d < g.m; ++d) {
            if (g.adjacent(c, d)) continue;
            a.strings_of_colour[c].push_back(next);
            a.strings_of_colour[d].push_back(next);
            ++next;
        }
    a.string_count = next;
    for (auto& s : a.strings_of_colour) std::sort(s.begin(), s.end());
    std::string why;
    if (!is_valid_assignment(a, g, &why)) throw std::logic_error("build_string_assignment: " + why);
    return a;
}

// A word of colours is reduced when between any two occurrences of the
// same colour some letter does not commute with it (non-adjacent in g).
inline bool is_g_reduced(const std::vector<int>& word, const ColourGraph& g) {
    if (word.empty()) return false;
    for (int c : word)
        if (c < 0 || c >= g.m) throw std::invalid_argument("is_g_reduced: colour out of range");
    for (std::size_t i = 0; i < word.size(); ++i)
        for (std::size_t j = i + 1; j < word.size(); ++j) {
            if (word[i] != word[j]) continue;
            bool blocked = false;
            for (std::size_t l = i + 1; l < j; ++l)
                if (word[l] != word[i] && !g.adjacent(word[l], word[i])) blocked = true;
            if (!blocked) return false;
        }
    return true;
}

struct LoopFactor {
    int label = 0;
    bool star = false;
    bool operator==(const LoopFactor&) const = default;
};

struct TestDigraph {
    struct Edge {
        int src = 0, dst = 0;
        int colour = 0;
        int label = 0;
        bool star = false;
        int id = 0;  // stable through restrict/quotient
    };

    int n = 0;            // vertices 0..n-1
    int colour_count = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<LoopFactor>> loops;  // one list per vertex
    std::vector<std::string> label_names;        // optional, indexed by label handle
    std::vector<std::string> colour_names;       // optional

    static TestDigraph make(int n, int colour_count,
                            std::vector<std::tuple<int, int, int, int>> simple_edges) {
        TestDigraph t;
        t.n = n;
        t.colour_count = colour_count;
        t.loops.assign(n, {});
        for (auto [src, dst, colour, label] : simple_edges)
            t.add_edge(src, dst, colour, label);
        return t;
    }

    int add_edge(int src, int dst, int colour, int label, bool star = false) {
        if (src < 0 || src >= n || dst < 0 || dst >= n)
            throw std::invalid_argument("digraph: edge endpoint out of range");
        if (colour < 0 || colour >= colour_count)
            throw std::invalid_argument("digraph: colour out of range");
        int id = static_cast<int>(edges.size());
        edges.push_back({src, dst, colour, label, star, id});
        return id;
    }

    void add_loop(int v, int label, bool star = false) {
        if (v < 0 || v >= n) throw std::invalid_argument("digraph: loop vertex out of range");
        loops.at(v).push_back({label, star});
    }

    bool has_loops() const {
        for (auto& l : loops)
            if (!l.empty()) return true;
        return false;
    }
};

// Keeps every vertex, drops edges whose colour is not in the set.
inline TestDigraph restrict_colours(const TestDigraph& t, const std::set<int>& colours) {
    TestDigraph out = t;
    out.edges.clear();
    for (auto& e : t.edges)
        if (colours.count(e.colour)) out.edges.push_back(e);
    return out;
}

inline TestDigraph strip_loops(const TestDigraph& t) {
    TestDigraph out = t;
    out.loops.assign(t.n, {});
    return out;
}

// Vertices become the blocks of p (all of them, merged or not); loop
// decorations of merged vertices concatenate in ascending original vertex
// order. Edge ids survive.
inline TestDigraph quotient(const TestDigraph& t, const Partition& p) {
    if (p.size() != t.n) throw std::invalid_argument("quotient: partition size mismatch");
    TestDigraph out;
    out.n = p.block_count();
    out.colour_count = t.colour_count;
    out.label_names = t.label_names;
    out.colour_names = t.colour_names;
    out.loops.assign(out.n, {});
    for (int v = 0; v < t.n; ++v)
        for (auto& f : t.loops[v]) out.loops[p.block_of(v)].push_back(f);
    for (auto& e : t.edges) {
        auto c = e;
        c.src = p.block_of(e.src);
        c.dst = p.block_of(e.dst);
        out.edges.push_back(c);
    }
    return out;
}

// Connected components of the underlying undirected multigraph, isolated
// vertices included as singleton blocks.
inline Partition components(const TestDigraph& t) {
    std::vector<int> parent(t.n);
    for (int v = 0; v < t.n; ++v) parent[v] = v;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto& e : t.edges) parent[find(e.src)] = find(e.dst);
    std::vector<int> lab(t.n);
    for (int v = 0; v < t.n; ++v) lab[v] = find(v);
    return Partition::from_labels(lab);
}

inline int component_count(const TestDigraph& t) { return components(t).block_count(); }

// Floor for string s: components after deleting every edge whose colour
// uses s.
inline Partition rho(const TestDigraph& t, const StringAssignment& a, int s) {
    if (s < 0 || s >= a.string_count) throw std::invalid_argument("rho: string out of range");
    if (t.colour_count > a.colour_count()) throw std::invalid_argument("rho: colour count mismatch");
    std::set<int> keep;
    for (int c = 0; c < t.colour_count; ++c) {
        bool uses = false;
        for (int u : a.strings_of_colour[c]) uses |= (u == s);
        if (!uses) keep.insert(c);
    }
    return components(restrict_colours(t, keep));
}

inline std::vector<Partition> rho_tuple(const TestDigraph& t, const StringAssignment& a) {
    std::vector<Partition> out;
    out.reserve(a.string_count);
    for (int s = 0; s < a.string_count; ++s) out.push_back(rho(t, a, s));
    return out;
}

// pi_c = meet over the strings of colour c.
inline Partition pi_colour(const std::vector<Partition>& pi, const StringAssignment& a, int c) {
    if (c < 0 || c >= a.colour_count()) throw std::invalid_argument("pi_colour: colour out of range");
    const auto& strings = a.strings_of_colour[c];
    if (strings.empty()) throw std::invalid_argument("pi_colour: colour has no strings");
    Partition m = pi.at(strings[0]);
    for (std::size_t i = 1; i < strings.size(); ++i) m = m.meet(pi.at(strings[i]));
    return m;
}

// T_{pi,c}: the colour-c subgraph squeezed by pi_c. Every block of pi_c is
// a vertex, so isolated blocks count.
inline TestDigraph colour_quotient(const TestDigraph& t, const StringAssignment& a,
                                   const std::vector<Partition>& pi, int c) {
    return quotient(restrict_colours(t, {c}), pi_colour(pi, a, c));
}

// T^pi_s: edges of every colour using s, squeezed by pi_s.
inline TestDigraph string_quotient(const TestDigraph& t, const StringAssignment& a,
                                   const std::vector<Partition>& pi, int s) {
    std::set<int> cs;
    for (int c = 0; c < t.colour_count; ++c)
        for (int u : a.strings_of_colour[c])
            if (u == s) cs.insert(c);
    return quotient(restrict_colours(t, cs), pi.at(s));
}

// Bipartite multigraph recording, for one string s, how the components of
// the colour quotients T_{pi,c} (c using s) attach to the blocks of pi_s.
// Left vertices are blocks of pi_s; right vertices are pairs (colour,
// component); one edge per vertex of each T_{pi,c}.
struct GccGraph {
    int left_count = 0;
    struct Right {
        int colour = 0;
        int comp = 0;
    };
    std::vector<Right> rights;
    struct GccEdge {
        int left = 0;
        int right = 0;   // index into rights
        int colour = 0;
        int source_block = 0;  // which block of pi_c this edge came from
    };
    std::vector<GccEdge> edges;

    int vertex_count() const { return left_count + static_cast<int>(rights.size()); }
};

// Connected and edge count one less than vertex count; parallel edges make
// the count fail, so they are rejected as they should be.
inline bool is_tree(const GccGraph& g) {
    int nv = g.vertex_count();
    if (nv == 0) return true;
    if (static_cast<int>(g.edges.size()) != nv - 1) return false;
    std::vector<int> parent(nv);
    for (int v = 0; v < nv; ++v) parent[v] = v;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto& e : g.edges) parent[find(e.left)] = find(g.left_count + e.right);
    int roots = 0;
    for (int v = 0; v < nv; ++v) roots += (find(v) == v);
    return roots == 1;
}

inline GccGraph gcc(const TestDigraph& t, const StringAssignment& a,
                    const std::vector<Partition>& pi, int s) {
    if (s < 0 || s >= a.string_count) throw std::invalid_argument("gcc: string out of range");
    if (static_cast<int>(pi.size()) != a.string_count)
        throw std::invalid_argument("gcc: partition tuple size mismatch");
    for (int u = 0; u < a.string_count; ++u)
        if (!rho(t, a, u).leq(pi[u]))
            throw std::invalid_argument("gcc: pi not above the component floor rho");
    const Partition& ps = pi[s];
    GccGraph g;
    g.left_count = ps.block_count();
    for (int c = 0; c < t.colour_count; ++c) {
        bool uses = false;
        for (int u : a.strings_of_colour[c]) uses |= (u == s);
        if (!uses) continue;
        Partition pc = pi_colour(pi, a, c);
        TestDigraph tc = colour_quotient(t, a, pi, c);
        Partition comps = components(tc);
        int base = static_cast<int>(g.rights.size());
        for (int k = 0; k < comps.block_count(); ++k) g.rights.push_back({c, k});
        // one edge per block of pi_c: from its component to its pi_s block
        for (int b = 0; b < pc.block_count(); ++b) {
            int rep = pc.blocks()[b][0];
            g.edges.push_back({ps.block_of(rep), base + comps.block_of(b), c, b});
        }
    }
    return g;
}

// Cut edges, two-edge-connected components, the forest they span and its
// leaf count (isolated forest vertices count twice).
struct TwoEdgeReport {
    bool two_edge_connected = false;  // connected with no cut edge
    std::vector<int> cut_edges;       // edge ids
    Partition tec_components;         // vertex partition into 2-edge-connected pieces
    std::vector<std::pair<int, int>> forest_edges;  // block ids of tec_components
    int leaf_count = 0;
};

inline TwoEdgeReport two_edge_connected(const TestDigraph& t) {
    int n = t.n;
    int m = static_cast<int>(t.edges.size());
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbour, edge index)
    for (int i = 0; i < m; ++i) {
        auto& e = t.edges[i];
        if (e.src == e.dst) continue;  // self-loops never cut
        adj[e.src].push_back({e.dst, i});
        adj[e.dst].push_back({e.src, i});
    }
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<char> is_cut(m, 0);
    int timer = 0;
    // iterative dfs; parallel edges are distinct edge indices, so a second
    // copy of the entry edge legitimately lowers low[]
    for (int root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        std::vector<std::tuple<int, int, std::size_t>> stack;  // vertex, entry edge, next adj pos
        stack.push_back({root, -1, 0});
        disc[root] = low[root] = timer++;
        while (!stack.empty()) {
            auto& [v, pe, pos] = stack.back();
            if (pos < adj[v].size()) {
                auto [w, ei] = adj[v][pos++];
                if (ei == pe) continue;
                if (disc[w] == -1) {
                    disc[w] = low[w] = timer++;
                    stack.push_back({w, ei, 0});
                } else {
                    low[v] = std::min(low[v], disc[w]);
                }
            } else {
                int vv = v, pev = pe;
                stack.pop_back();
                if (!stack.empty()) {
                    int parent = std::get<0>(stack.back());
                    low[parent] = std::min(low[parent], low[vv]);
                    if (low[vv] > disc[parent]) is_cut[pev] = 1;
                }
            }
        }
    }
    TwoEdgeReport rep;
    for (int i = 0; i < m; ++i)
        if (is_cut[i]) rep.cut_edges.push_back(t.edges[i].id);
    // components after deleting cut edges
    std::vector<int> parent(n);
    for (int v = 0; v < n; ++v) parent[v] = v;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < m; ++i)
        if (!is_cut[i]) parent[find(t.edges[i].src)] = find(t.edges[i].dst);
    std::vector<int> lab(n);
    for (int v = 0; v < n; ++v) lab[v] = find(v);
    rep.tec_components = Partition::from_labels(lab);
    std::vector<int> degree(rep.tec_components.block_count(), 0);
    for (int i = 0; i < m; ++i)
        if (is_cut[i]) {
            int a = rep.tec_components.block_of(t.edges[i].src);
            int b = rep.tec_components.block_of(t.edges[i].dst);
            rep.forest_edges.push_back({a, b});
            ++degree[a];
            ++degree[b];
        }
    for (int d : degree) rep.leaf_count += (d == 0) ? 2 : (d == 1) ? 1 : 0;
    rep.two_edge_connected = rep.cut_edges.empty() && component_count(t) <= 1;
    return rep;
}

inline int forest_leaf_count(const TestDigraph& t) { return two_edge_connected(t).leaf_count; }

}  // namespace permtraffic::digraphs
