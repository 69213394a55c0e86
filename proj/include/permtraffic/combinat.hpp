#pragma once

// Set partitions of {0..n-1} with the reverse-refinement order
// (a <= b iff every block of b is a union of blocks of a), meet/join,
// Moebius coefficients and a lazy stream of partitions above a floor.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace permtraffic::combinat {

class Partition {
public:
    Partition() = default;

    static Partition bottom(int n) {
        Partition p;
        p.n_ = check_n(n);
        p.block_of_.resize(n);
        std::iota(p.block_of_.begin(), p.block_of_.end(), 0);
        p.blocks_.resize(n);
        for (int v = 0; v < n; ++v) p.blocks_[v] = {v};
        return p;
    }

    static Partition top(int n) {
        Partition p;
        p.n_ = check_n(n);
        p.block_of_.assign(n, 0);
        p.blocks_.assign(1, {});
        if (n == 0) p.blocks_.clear();
        for (int v = 0; v < n; ++v) p.blocks_[0].push_back(v);
        return p;
    }

    // Canonicalizes on construction; rejects anything that is not a
    // partition of {0..n-1}.
    static Partition from_blocks(int n, std::vector<std::vector<int>> blocks) {
        check_n(n);
        std::vector<int> seen(n, 0);
        for (auto& b : blocks) {
            if (b.empty()) throw std::invalid_argument("partition: empty block");
            for (int v : b) {
                if (v < 0 || v >= n) throw std::invalid_argument("partition: element out of range");
                if (seen[v]++) throw std::invalid_argument("partition: repeated element");
            }
        }
        for (int v = 0; v < n; ++v)
            if (!seen[v]) throw std::invalid_argument("partition: element missing");
        std::vector<int> lab(n, -1);
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (int v : blocks[i]) lab[v] = static_cast<int>(i);
        return from_labels(lab);
    }

    // Kernel of a label vector: u,v share a block iff lab[u] == lab[v].
    static Partition from_labels(const std::vector<int>& lab) {
        Partition p;
        p.n_ = static_cast<int>(lab.size());
        p.block_of_.assign(p.n_, -1);
        std::vector<int> remap;  // label value -> canonical block id, by first occurrence
        std::vector<long long> vals;
        for (int v = 0; v < p.n_; ++v) {
            int id = -1;
            for (std::size_t j = 0; j < vals.size(); ++j)
                if (vals[j] == lab[v]) { id = static_cast<int>(j); break; }
            if (id < 0) {
                id = static_cast<int>(vals.size());
                vals.push_back(lab[v]);
                p.blocks_.emplace_back();
            }
            p.block_of_[v] = id;
            p.blocks_[id].push_back(v);
        }
        return p;
    }

    int size() const { return n_; }
    int block_count() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    int block_of(int v) const { return block_of_.at(v); }
    const std::vector<int>& labels() const { return block_of_; }
    bool same_block(int u, int v) const { return block_of_.at(u) == block_of_.at(v); }

    bool operator==(const Partition& o) const { return n_ == o.n_ && block_of_ == o.block_of_; }
    bool operator!=(const Partition& o) const { return !(*this == o); }
    bool operator<(const Partition& o) const {
        if (n_ != o.n_) return n_ < o.n_;
        return block_of_ < o.block_of_;
    }

    // this <= other in reverse refinement: every block of this sits inside
    // one block of other.
    bool leq(const Partition& o) const {
        check_same(o);
        std::vector<int> img(blocks_.size(), -1);
        for (int v = 0; v < n_; ++v) {
            int b = block_of_[v];
            if (img[b] < 0) img[b] = o.block_of_[v];
            else if (img[b] != o.block_of_[v]) return false;
        }
        return true;
    }

    // Greatest lower bound: common refinement.
    Partition meet(const Partition& o) const {
        check_same(o);
        std::vector<int> lab(n_);
        for (int v = 0; v < n_; ++v)
            lab[v] = block_of_[v] * (o.block_count() + 1) + o.block_of_[v];
        return from_labels(lab);
    }

    // Least upper bound: transitive closure of the two block structures.
    Partition join(const Partition& o) const {
        check_same(o);
        std::vector<int> parent(n_);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
        for (auto& b : blocks_)
            for (std::size_t i = 1; i < b.size(); ++i) unite(b[0], b[i]);
        for (auto& b : o.blocks())
            for (std::size_t i = 1; i < b.size(); ++i) unite(b[0], b[i]);
        std::vector<int> lab(n_);
        for (int v = 0; v < n_; ++v) lab[v] = find(v);
        return from_labels(lab);
    }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            s += (i ? ",{" : "{");
            for (std::size_t j = 0; j < blocks_[i].size(); ++j) {
                if (j) s += ",";
                s += std::to_string(blocks_[i][j]);
            }
            s += "}";
        }
        return s + "}";
    }

private:
    static int check_n(int n) {
        if (n < 0) throw std::invalid_argument("partition: negative ground set");
        return n;
    }
    void check_same(const Partition& o) const {
        if (n_ != o.n_) throw std::invalid_argument("partition: mismatched ground sets");
    }

    int n_ = 0;
    std::vector<std::vector<int>> blocks_;  // ordered by smallest element, sorted inside
    std::vector<int> block_of_;
};

inline Partition kernel_of(const std::vector<int>& values) { return Partition::from_labels(values); }

// Lazy stream of all partitions pi >= floor, i.e. partitions of the set of
// floor's blocks, enumerated by restricted growth strings in lexicographic
// order (so the stream starts at the full join of floor's blocks and ends
// at floor itself). Count is Bell(#blocks(floor)).
class AboveStream {
public:
    explicit AboveStream(Partition floor) : floor_(std::move(floor)) {
        k_ = floor_.block_count();
        rgs_.assign(k_, 0);
        done_ = false;
    }

    // Writes the next partition into out; false once exhausted.
    bool next(Partition& out) {
        if (done_) return false;
        out = lift();
        // advance rgs
        for (int i = k_ - 1; i >= 1; --i) {
            int mx = 0;
            for (int j = 0; j < i; ++j) mx = std::max(mx, rgs_[j]);
            if (rgs_[i] <= mx) {
                ++rgs_[i];
                std::fill(rgs_.begin() + i + 1, rgs_.end(), 0);
                return true;
            }
            rgs_[i] = 0;
        }
        done_ = true;
        return true;
    }

private:
    Partition lift() const {
        std::vector<int> lab(floor_.size());
        for (int v = 0; v < floor_.size(); ++v) lab[v] = rgs_[floor_.block_of(v)];
        return Partition::from_labels(lab);
    }

    Partition floor_;
    int k_ = 0;
    std::vector<int> rgs_;
    bool done_ = true;
};

inline std::vector<Partition> partitions_above(const Partition& floor) {
    std::vector<Partition> out;
    AboveStream st(floor);
    Partition p;
    while (st.next(p)) out.push_back(p);
    return out;
}

inline std::int64_t factorial(int n) {
    if (n < 0 || n > 20) throw std::invalid_argument("factorial: out of supported range");
    std::int64_t r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline std::int64_t bell_number(int n) {
    if (n < 0 || n > 25) throw std::invalid_argument("bell_number: out of supported range");
    // Bell triangle
    std::vector<std::int64_t> row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<std::int64_t> nxt(i + 1);
        nxt[0] = row.back();
        for (int j = 1; j <= i; ++j) nxt[j] = nxt[j - 1] + row[j - 1];
        row.swap(nxt);
    }
    return row[0];
}

// Moebius coefficient mu(a, b) of the partition lattice, a <= b required.
// The interval [a,b] factors over the blocks of b; a block of b holding m
// blocks of a contributes (-1)^(m-1) (m-1)!.
inline std::int64_t moebius_coefficient(const Partition& a, const Partition& b) {
    if (!a.leq(b)) throw std::invalid_argument("moebius_coefficient: a <= b required");
    std::vector<std::vector<int>> seen(b.block_count());
    for (int v = 0; v < a.size(); ++v) {
        auto& s = seen[b.block_of(v)];
        int ab = a.block_of(v);
        if (std::find(s.begin(), s.end(), ab) == s.end()) s.push_back(ab);
    }
    std::int64_t mu = 1;
    for (auto& s : seen) {
        int m = static_cast<int>(s.size());
        std::int64_t f = factorial(m - 1);
        mu *= (m % 2 == 0) ? -f : f;
    }
    return mu;
}

}  // namespace permtraffic::combinat
