#pragma once

// Exact arithmetic in rings of cyclotomic integers Z[zeta_m], elements in the
// power basis modulo the m-th cyclotomic polynomial. Conductors are kept in
// lowest terms per element: after every operation the element is re-expressed
// over the smallest divisor of the conductor that contains it. The numeric
// embedding sends zeta_m to exp(2 pi i / m).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "permtraffic/errors.hpp"
#include "permtraffic/linalg.hpp"

namespace permtraffic::cyc {

using linalg::Complex;

// conductor ceiling; operations whose common conductor exceeds it refuse
inline std::atomic<int> max_conductor{360};

inline int euler_phi(int m) {
    int r = m;
    for (int p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            while (m % p == 0) m /= p;
            r -= r / p;
        }
    if (m > 1) r -= r / m;
    return r;
}

namespace detail {

using Poly = std::vector<long long>;  // coefficient list, low degree first

inline int degree(const Poly& p) {
    int d = static_cast<int>(p.size()) - 1;
    while (d > 0 && p[d] == 0) --d;
    return d;
}

// exact long division, asserts zero remainder (used only on x^m - 1)
inline Poly divide_exact(Poly num, const Poly& den) {
    int dn = degree(num), dd = degree(den);
    Poly q(dn - dd + 1, 0);
    for (int i = dn; i >= dd; --i) {
        long long c = num[i] / den[dd];
        q[i - dd] = c;
        for (int j = 0; j <= dd; ++j) num[i - dd + j] -= c * den[j];
    }
    for (long long c : num)
        if (c != 0) throw std::logic_error("cyclotomic division left a remainder");
    return q;
}

// fills the cache bottom-up: every divisor's polynomial exists before use
inline const Poly& cyclotomic_poly_locked(std::map<int, Poly>& cache, int m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    for (int d = 1; d < m; ++d)
        if (m % d == 0) cyclotomic_poly_locked(cache, d);
    Poly num(m + 1, 0);
    num[0] = -1;
    num[m] = 1;  // x^m - 1
    for (int d = 1; d < m; ++d)
        if (m % d == 0) num = divide_exact(std::move(num), cache.at(d));
    return cache.emplace(m, std::move(num)).first->second;
}

inline Poly cyclotomic_poly(int m) {
    static std::map<int, Poly> cache;
    static std::mutex lock;
    std::scoped_lock guard(lock);
    return cyclotomic_poly_locked(cache, m);
}

// remainder of p modulo the monic cyclotomic polynomial of conductor m
inline Poly reduce_mod(Poly p, int m) {
    const Poly phi = cyclotomic_poly(m);
    int deg = degree(phi);
    if (static_cast<int>(p.size()) < deg) p.resize(deg, 0);
    for (int i = static_cast<int>(p.size()) - 1; i >= deg; --i) {
        long long c = p[i];
        if (c == 0) continue;
        for (int j = 0; j <= deg; ++j) p[i - deg + j] -= c * phi[j];
    }
    p.resize(deg);
    return p;
}

inline std::vector<int> divisors(int m) {
    std::vector<int> out;
    for (int d = 1; d * d <= m; ++d)
        if (m % d == 0) {
            out.push_back(d);
            if (d != m / d) out.push_back(m / d);
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

class CycInt {
  public:
    CycInt() : m_(1), coeff_(1, 0) {}
    CycInt(long long n) : m_(1), coeff_(1, n) {}  // NOLINT: integers embed implicitly

    static CycInt zeta(int m) { return zeta_power(m, 1); }

    static CycInt zeta_power(int m, long long e) {
        if (m < 1) throw std::invalid_argument("zeta_power: conductor must be positive");
        check_conductor(m);
        e %= m;
        if (e < 0) e += m;
        if (m == 1) return CycInt(1);
        detail::Poly p(static_cast<std::size_t>(e) + 1, 0);
        p[static_cast<std::size_t>(e)] = 1;
        CycInt z;
        z.m_ = m;
        z.coeff_ = detail::reduce_mod(std::move(p), m);
        z.lower();
        return z;
    }

    static CycInt from_coefficients(int m, std::vector<long long> coeff) {
        if (m < 1) throw std::invalid_argument("cyclotomic: conductor must be positive");
        check_conductor(m);
        CycInt z;
        z.m_ = m;
        z.coeff_ = detail::reduce_mod(std::move(coeff), m);
        z.lower();
        return z;
    }

    int conductor() const { return m_; }
    const std::vector<long long>& coefficients() const { return coeff_; }

    bool is_zero() const {
        for (long long c : coeff_)
            if (c) return false;
        return true;
    }

    bool is_integer() const { return m_ == 1; }
    long long integer_value() const {
        if (m_ != 1) throw std::logic_error("integer_value: element is not rational");
        return coeff_[0];
    }

    friend CycInt operator+(const CycInt& a, const CycInt& b) {
        int M = common(a.m_, b.m_);
        detail::Poly pa = a.promoted(M), pb = b.promoted(M);
        for (std::size_t i = 0; i < pa.size(); ++i) pa[i] += pb[i];
        return from_coefficients(M, std::move(pa));
    }

    friend CycInt operator-(const CycInt& a, const CycInt& b) {
        int M = common(a.m_, b.m_);
        detail::Poly pa = a.promoted(M), pb = b.promoted(M);
        for (std::size_t i = 0; i < pa.size(); ++i) pa[i] -= pb[i];
        return from_coefficients(M, std::move(pa));
    }

    CycInt operator-() const {
        CycInt z = *this;
        for (auto& c : z.coeff_) c = -c;
        return z;
    }

    friend CycInt operator*(const CycInt& a, const CycInt& b) {
        int M = common(a.m_, b.m_);
        detail::Poly pa = a.promoted(M), pb = b.promoted(M);
        detail::Poly prod(pa.size() + pb.size() - 1, 0);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            if (pa[i] == 0) continue;
            for (std::size_t j = 0; j < pb.size(); ++j) prod[i + j] += pa[i] * pb[j];
        }
        return from_coefficients(M, std::move(prod));
    }

    friend bool operator==(const CycInt& a, const CycInt& b) {
        int M = common(a.m_, b.m_);
        return a.promoted(M) == b.promoted(M);
    }
    friend bool operator!=(const CycInt& a, const CycInt& b) { return !(a == b); }

    // the Galois map zeta_m -> zeta_m^k, k coprime to the conductor
    CycInt galois(long long k) const {
        if (m_ == 1) return *this;
        k %= m_;
        if (k < 0) k += m_;
        if (std::gcd(k, static_cast<long long>(m_)) != 1)
            throw std::invalid_argument("galois: exponent shares a factor with the conductor");
        detail::Poly out(static_cast<std::size_t>(m_), 0);
        for (std::size_t i = 0; i < coeff_.size(); ++i)
            out[static_cast<std::size_t>((i * k) % m_)] += coeff_[i];
        return from_coefficients(m_, std::move(out));
    }

    CycInt conj() const { return galois(m_ - 1); }  // zeta -> zeta^{-1}

    Complex to_complex() const {
        Complex s = 0.0;
        for (std::size_t i = 0; i < coeff_.size(); ++i) {
            if (coeff_[i] == 0) continue;
            double ang = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(m_);
            s += static_cast<double>(coeff_[i]) * Complex(std::cos(ang), std::sin(ang));
        }
        return s;
    }

    // literal form used by the polynomial grammar and the matrix files
    std::string to_string() const {
        if (m_ == 1) return std::to_string(coeff_[0]);
        std::string s = "c(" + std::to_string(m_) + ";";
        for (std::size_t i = 0; i < coeff_.size(); ++i)
            s += (i ? "," : " ") + std::to_string(coeff_[i]);
        return s + ")";
    }

  private:
    static void check_conductor(int m) {
        if (m > max_conductor.load())
            throw ResourceError("cyclotomic conductor " + std::to_string(m) +
                                " exceeds the configured maximum " +
                                std::to_string(max_conductor.load()));
    }

    static int common(int a, int b) {
        long long l = std::lcm(static_cast<long long>(a), static_cast<long long>(b));
        if (l > max_conductor.load())
            throw ResourceError("cyclotomic conductor " + std::to_string(l) +
                                " exceeds the configured maximum " +
                                std::to_string(max_conductor.load()));
        return static_cast<int>(l);
    }

    // coefficients re-expressed over the larger conductor M (m_ | M)
    detail::Poly promoted(int M) const {
        if (M == m_) return coeff_;
        int step = M / m_;
        detail::Poly p(static_cast<std::size_t>(M), 0);
        for (std::size_t i = 0; i < coeff_.size(); ++i)
            p[i * static_cast<std::size_t>(step)] += coeff_[i];
        return detail::reduce_mod(std::move(p), M);
    }

    // rewrite over the smallest divisor of the conductor containing the element
    void lower() {
        if (m_ == 1) return;
        if (is_zero()) {
            m_ = 1;
            coeff_.assign(1, 0);
            return;
        }
        for (int d : detail::divisors(m_)) {
            if (d == m_) break;
            std::vector<long long> out;
            if (express_over(d, &out)) {
                m_ = d;
                coeff_ = std::move(out);
                return;
            }
        }
    }

    // try to solve for integer coefficients over Z[zeta_d], d | m_; the double
    // solve only proposes, the exact integer check decides
    bool express_over(int d, std::vector<long long>* out) const {
        int rows = euler_phi(m_), cols = euler_phi(d);
        int step = m_ / d;
        std::vector<detail::Poly> col(cols);
        for (int j = 0; j < cols; ++j) {
            detail::Poly p(static_cast<std::size_t>(j) * step + 1, 0);
            p[static_cast<std::size_t>(j) * step] = 1;
            col[j] = detail::reduce_mod(std::move(p), m_);
        }
        Eigen::MatrixXd e(rows, cols);
        Eigen::VectorXd rhs(rows);
        for (int i = 0; i < rows; ++i) {
            rhs(i) = static_cast<double>(coeff_[i]);
            for (int j = 0; j < cols; ++j) e(i, j) = static_cast<double>(col[j][i]);
        }
        Eigen::VectorXd x = e.colPivHouseholderQr().solve(rhs);
        std::vector<long long> guess(cols);
        for (int j = 0; j < cols; ++j) guess[j] = std::llround(x(j));
        for (int i = 0; i < rows; ++i) {
            long long acc = 0;
            for (int j = 0; j < cols; ++j) acc += guess[j] * col[j][i];
            if (acc != coeff_[i]) return false;
        }
        *out = std::move(guess);
        return true;
    }

    int m_;
    detail::Poly coeff_;
};

inline std::vector<int> units_mod(int m) {
    if (m == 1) return {1};
    std::vector<int> out;
    for (int k = 1; k < m; ++k)
        if (std::gcd(k, m) == 1) out.push_back(k);
    return out;
}

// Dense matrix over the cyclotomic integers. The stored conductor is the
// least common conductor of the entries after each is lowered.
class CycMatrix {
  public:
    CycMatrix() = default;
    CycMatrix(int rows, int cols) : rows_(rows), cols_(cols), entries_(rows * cols) {
        if (rows < 1 || cols < 1) throw std::invalid_argument("cyclotomic matrix: empty shape");
    }

    static CycMatrix identity(int n) {
        CycMatrix a(n, n);
        for (int i = 0; i < n; ++i) a.at(i, i) = CycInt(1);
        return a;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    CycInt& at(int i, int j) { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
    const CycInt& at(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * cols_ + j];
    }

    int conductor() const {
        long long l = 1;
        for (auto& e : entries_) l = std::lcm(l, static_cast<long long>(e.conductor()));
        return static_cast<int>(l);
    }

    friend CycMatrix operator+(const CycMatrix& a, const CycMatrix& b) {
        a.require_shape(b.rows_, b.cols_);
        CycMatrix r(a.rows_, a.cols_);
        for (std::size_t i = 0; i < r.entries_.size(); ++i)
            r.entries_[i] = a.entries_[i] + b.entries_[i];
        return r;
    }

    friend CycMatrix operator-(const CycMatrix& a, const CycMatrix& b) {
        a.require_shape(b.rows_, b.cols_);
        CycMatrix r(a.rows_, a.cols_);
        for (std::size_t i = 0; i < r.entries_.size(); ++i)
            r.entries_[i] = a.entries_[i] - b.entries_[i];
        return r;
    }

    friend CycMatrix operator*(const CycMatrix& a, const CycMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("cyclotomic matrix: shape mismatch");
        CycMatrix r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                if (a.at(i, k).is_zero()) continue;
                for (int j = 0; j < b.cols_; ++j)
                    r.at(i, j) = r.at(i, j) + a.at(i, k) * b.at(k, j);
            }
        return r;
    }

    friend CycMatrix operator*(const CycInt& s, const CycMatrix& a) {
        CycMatrix r(a.rows_, a.cols_);
        for (std::size_t i = 0; i < r.entries_.size(); ++i) r.entries_[i] = s * a.entries_[i];
        return r;
    }

    friend bool operator==(const CycMatrix& a, const CycMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i)
            if (a.entries_[i] != b.entries_[i]) return false;
        return true;
    }
    friend bool operator!=(const CycMatrix& a, const CycMatrix& b) { return !(a == b); }

    CycMatrix adjoint() const {
        CycMatrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j).conj();
        return r;
    }

    CycMatrix galois(long long k) const {
        CycMatrix r(rows_, cols_);
        int m = conductor();
        if (m > 1 && std::gcd(k % m, static_cast<long long>(m)) != 1)
            throw std::invalid_argument("galois: exponent shares a factor with the conductor");
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            // apply the map at the matrix conductor so all entries move together
            int me = entries_[i].conductor();
            long long ke = (me == 1) ? 1 : (k % me + me) % me;
            r.entries_[i] = entries_[i].galois(ke);
        }
        return r;
    }

    CycInt trace() const {
        if (rows_ != cols_) throw std::invalid_argument("trace: not square");
        CycInt t;
        for (int i = 0; i < rows_; ++i) t = t + at(i, i);
        return t;
    }

    CycMatrix diag_part() const {
        if (rows_ != cols_) throw std::invalid_argument("diag_part: not square");
        CycMatrix r(rows_, cols_);
        for (int i = 0; i < rows_; ++i) r.at(i, i) = at(i, i);
        return r;
    }

    linalg::Matrix to_complex_matrix() const {
        linalg::Matrix m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = at(i, j).to_complex();
        return m;
    }

  private:
    void require_shape(int r, int c) const {
        if (rows_ != r || cols_ != c)
            throw std::invalid_argument("cyclotomic matrix: shape mismatch");
    }

    int rows_ = 0, cols_ = 0;
    std::vector<CycInt> entries_;
};

inline CycMatrix kron(const CycMatrix& a, const CycMatrix& b) {
    CycMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            if (a.at(i, j).is_zero()) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r.at(i * b.rows() + k, j * b.cols() + l) = a.at(i, j) * b.at(k, l);
        }
    return r;
}

inline CycMatrix direct_sum(const CycMatrix& a, const CycMatrix& b) {
    CycMatrix r(a.rows() + b.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) r.at(a.rows() + i, a.cols() + j) = b.at(i, j);
    return r;
}

}  // namespace permtraffic::cyc
