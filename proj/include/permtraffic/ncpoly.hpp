#pragma once

// Noncommutative *-polynomials over exact (cyclotomic integer) or complex
// coefficients, their free difference quotients into the tensor square, the
// relation matrix D_F, and evaluation at matrix tuples. The right tensor leg
// is the opposite algebra; at matrix scale it acts by transposition, so
// a (x) b evaluates to kron(A, B^T).

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "permtraffic/cyclotomic.hpp"
#include "permtraffic/errors.hpp"
#include "permtraffic/linalg.hpp"

namespace permtraffic::ncpoly {

using cyc::CycInt;
using cyc::CycMatrix;
using linalg::Complex;
using linalg::Matrix;

// a word in variable letters; code 2v is the v-th variable, 2v+1 its star
using Monomial = std::vector<int>;

inline bool coeff_is_zero(const Complex& c) { return c == Complex(0.0); }
inline bool coeff_is_zero(const CycInt& c) { return c.is_zero(); }
inline Complex coeff_to_complex(const Complex& c) { return c; }
inline Complex coeff_to_complex(const CycInt& c) { return c.to_complex(); }

inline int letter_variable(int code) { return code / 2; }
inline bool letter_starred(int code) { return code % 2 != 0; }

// star of a word: reverse and toggle, with self-adjoint letters kept plain
inline Monomial star_word(const Monomial& w, const std::vector<bool>& self_adjoint) {
    Monomial out(w.rbegin(), w.rend());
    for (int& code : out) {
        int v = letter_variable(code);
        if (v < static_cast<int>(self_adjoint.size()) && self_adjoint[v]) continue;
        code ^= 1;
    }
    return out;
}

template <class Coeff>
class NcPolynomial {
  public:
    NcPolynomial() = default;
    explicit NcPolynomial(int vars) : vars_(vars) {
        if (vars < 0) throw std::invalid_argument("polynomial: negative variable count");
    }

    static NcPolynomial constant(int vars, Coeff c) {
        NcPolynomial p(vars);
        if (!coeff_is_zero(c)) p.terms_.emplace(Monomial{}, std::move(c));
        return p;
    }

    static NcPolynomial variable(int vars, int i, bool starred = false) {
        if (i < 0 || i >= vars) throw std::invalid_argument("polynomial: variable out of range");
        NcPolynomial p(vars);
        p.terms_.emplace(Monomial{2 * i + (starred ? 1 : 0)}, Coeff(1));
        return p;
    }

    int variables() const { return vars_; }
    const std::map<Monomial, Coeff>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (auto& [w, c] : terms_) d = std::max(d, static_cast<int>(w.size()));
        return d;
    }

    void add_term(Monomial w, const Coeff& c) {
        for (int code : w)
            if (letter_variable(code) < 0 || letter_variable(code) >= vars_)
                throw std::invalid_argument("polynomial: letter out of range");
        auto [it, fresh] = terms_.try_emplace(std::move(w), c);
        if (!fresh) {
            it->second = it->second + c;
            if (coeff_is_zero(it->second)) terms_.erase(it);
        } else if (coeff_is_zero(it->second)) {
            terms_.erase(it);
        }
    }

    friend NcPolynomial operator+(const NcPolynomial& a, const NcPolynomial& b) {
        a.require_space(b);
        NcPolynomial r = a;
        for (auto& [w, c] : b.terms_) r.add_term(w, c);
        return r;
    }

    friend NcPolynomial operator-(const NcPolynomial& a, const NcPolynomial& b) {
        a.require_space(b);
        NcPolynomial r = a;
        for (auto& [w, c] : b.terms_) r.add_term(w, Coeff(0) - c);
        return r;
    }

    friend NcPolynomial operator*(const NcPolynomial& a, const NcPolynomial& b) {
        a.require_space(b);
        NcPolynomial r(a.vars_);
        for (auto& [wa, ca] : a.terms_)
            for (auto& [wb, cb] : b.terms_) {
                Monomial w = wa;
                w.insert(w.end(), wb.begin(), wb.end());
                r.add_term(std::move(w), ca * cb);
            }
        return r;
    }

    friend NcPolynomial operator*(const Coeff& s, const NcPolynomial& a) {
        NcPolynomial r(a.vars_);
        for (auto& [w, c] : a.terms_) r.add_term(w, s * c);
        return r;
    }

    friend bool operator==(const NcPolynomial& a, const NcPolynomial& b) {
        return a.vars_ == b.vars_ && a.terms_ == b.terms_;
    }

    NcPolynomial adjoint(const std::vector<bool>& self_adjoint = {}) const {
        NcPolynomial r(vars_);
        for (auto& [w, c] : terms_) r.add_term(star_word(w, self_adjoint), conj_coeff(c));
        return r;
    }

    template <class F>
    auto map_coefficients(F&& f) const -> NcPolynomial<decltype(f(Coeff(0)))> {
        NcPolynomial<decltype(f(Coeff(0)))> r(vars_);
        for (auto& [w, c] : terms_) r.add_term(w, f(c));
        return r;
    }

  private:
    static Complex conj_coeff(const Complex& c) { return std::conj(c); }
    static CycInt conj_coeff(const CycInt& c) { return c.conj(); }

    void require_space(const NcPolynomial& b) const {
        if (vars_ != b.vars_)
            throw std::invalid_argument("polynomial: variable counts differ");
    }

    int vars_ = 0;
    std::map<Monomial, Coeff> terms_;
};

using Poly = NcPolynomial<Complex>;
using ExactPoly = NcPolynomial<CycInt>;

inline Matrix evaluate_word(const Monomial& w, const std::vector<Matrix>& x, long dim) {
    Matrix m = Matrix::Identity(dim, dim);
    for (int code : w)
        m = letter_starred(code) ? Matrix(m * x[letter_variable(code)].adjoint())
                                 : Matrix(m * x[letter_variable(code)]);
    return m;
}

template <class Coeff>
Matrix evaluate(const NcPolynomial<Coeff>& p, const std::vector<Matrix>& x) {
    if (static_cast<int>(x.size()) != p.variables())
        throw std::invalid_argument("evaluate: arity mismatch");
    long dim = x.empty() ? 1 : x.front().rows();
    for (auto& m : x)
        if (m.rows() != m.cols() || m.rows() != dim)
            throw std::invalid_argument("evaluate: matrices must be square of equal size");
    Matrix out = Matrix::Zero(dim, dim);
    for (auto& [w, c] : p.terms()) out += coeff_to_complex(c) * evaluate_word(w, x, dim);
    return out;
}

// exact evaluation over cyclotomic matrices; stars use the exact adjoint
inline CycMatrix evaluate_exact(const ExactPoly& p, const std::vector<CycMatrix>& x) {
    if (static_cast<int>(x.size()) != p.variables())
        throw std::invalid_argument("evaluate: arity mismatch");
    int dim = x.empty() ? 1 : x.front().rows();
    for (auto& m : x)
        if (m.rows() != m.cols() || m.rows() != dim)
            throw std::invalid_argument("evaluate: matrices must be square of equal size");
    CycMatrix out(dim, dim);
    for (auto& [w, c] : p.terms()) {
        CycMatrix term = CycMatrix::identity(dim);
        for (int code : w)
            term = letter_starred(code) ? term * x[letter_variable(code)].adjoint()
                                        : term * x[letter_variable(code)];
        out = out + c * term;
    }
    return out;
}

// ---- tensor-square polynomials ----

template <class Coeff>
class NcBiPoly {
  public:
    NcBiPoly() = default;
    explicit NcBiPoly(int vars) : vars_(vars) {}

    static NcBiPoly elementary(int vars, Monomial left, Monomial right, Coeff c = Coeff(1)) {
        NcBiPoly q(vars);
        q.add_term(std::move(left), std::move(right), std::move(c));
        return q;
    }

    int variables() const { return vars_; }
    const std::map<std::pair<Monomial, Monomial>, Coeff>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Monomial left, Monomial right, const Coeff& c) {
        auto key = std::make_pair(std::move(left), std::move(right));
        auto [it, fresh] = terms_.try_emplace(std::move(key), c);
        if (!fresh) {
            it->second = it->second + c;
            if (coeff_is_zero(it->second)) terms_.erase(it);
        } else if (coeff_is_zero(it->second)) {
            terms_.erase(it);
        }
    }

    friend NcBiPoly operator+(const NcBiPoly& a, const NcBiPoly& b) {
        NcBiPoly r = a;
        for (auto& [k, c] : b.terms_) r.add_term(k.first, k.second, c);
        return r;
    }

    friend NcBiPoly operator-(const NcBiPoly& a, const NcBiPoly& b) {
        NcBiPoly r = a;
        for (auto& [k, c] : b.terms_) r.add_term(k.first, k.second, Coeff(0) - c);
        return r;
    }

    // product in M (x) M^op: left legs concatenate, right legs concatenate
    // in the opposite order
    friend NcBiPoly operator*(const NcBiPoly& a, const NcBiPoly& b) {
        NcBiPoly r(a.vars_);
        for (auto& [ka, ca] : a.terms_)
            for (auto& [kb, cb] : b.terms_) {
                Monomial left = ka.first;
                left.insert(left.end(), kb.first.begin(), kb.first.end());
                Monomial right = kb.second;
                right.insert(right.end(), ka.second.begin(), ka.second.end());
                r.add_term(std::move(left), std::move(right), ca * cb);
            }
        return r;
    }

    friend bool operator==(const NcBiPoly& a, const NcBiPoly& b) {
        return a.vars_ == b.vars_ && a.terms_ == b.terms_;
    }

  private:
    int vars_ = 0;
    std::map<std::pair<Monomial, Monomial>, Coeff> terms_;
};

using BiPoly = NcBiPoly<Complex>;

// the derivation with d_i(S_j) = delta_{ij} 1 (x) 1 on plain (self-adjoint)
// words; starred letters are outside its domain
template <class Coeff>
NcBiPoly<Coeff> free_difference_quotient(const NcPolynomial<Coeff>& p, int i) {
    if (i < 0 || i >= p.variables())
        throw std::invalid_argument("difference quotient: variable out of range");
    NcBiPoly<Coeff> q(p.variables());
    for (auto& [w, c] : p.terms()) {
        for (int code : w)
            if (letter_starred(code))
                throw std::invalid_argument(
                    "difference quotient: defined on self-adjoint variables only");
        for (std::size_t pos = 0; pos < w.size(); ++pos) {
            if (letter_variable(w[pos]) != i) continue;
            Monomial left(w.begin(), w.begin() + pos);
            Monomial right(w.begin() + pos + 1, w.end());
            q.add_term(std::move(left), std::move(right), c);
        }
    }
    return q;
}

// rows: the commutators S_j (x) 1 - 1 (x) S_j, then one row of partials per
// relation; columns indexed by the variables
template <class Coeff>
std::vector<std::vector<NcBiPoly<Coeff>>> build_DF(const std::vector<NcPolynomial<Coeff>>& f,
                                                   int r) {
    if (r < 1) throw std::invalid_argument("relation matrix: need at least one variable");
    for (auto& p : f)
        if (p.variables() != r)
            throw std::invalid_argument("relation matrix: arity mismatch");
    std::vector<std::vector<NcBiPoly<Coeff>>> rows;
    std::vector<NcBiPoly<Coeff>> top;
    for (int j = 0; j < r; ++j) {
        NcBiPoly<Coeff> q(r);
        q.add_term(Monomial{2 * j}, Monomial{}, Coeff(1));
        q.add_term(Monomial{}, Monomial{2 * j}, Coeff(0) - Coeff(1));
        top.push_back(std::move(q));
    }
    rows.push_back(std::move(top));
    for (auto& p : f) {
        std::vector<NcBiPoly<Coeff>> row;
        for (int j = 0; j < r; ++j) row.push_back(free_difference_quotient(p, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// a (x) b acts on the N^2-dimensional space as kron(A, B^T)
template <class Coeff>
Matrix evaluate_bipoly(const NcBiPoly<Coeff>& q, const std::vector<Matrix>& x) {
    long dim = x.empty() ? 1 : x.front().rows();
    for (auto& m : x)
        if (m.rows() != m.cols() || m.rows() != dim)
            throw std::invalid_argument("evaluate: matrices must be square of equal size");
    Matrix out = Matrix::Zero(dim * dim, dim * dim);
    for (auto& [k, c] : q.terms()) {
        Matrix left = evaluate_word(k.first, x, dim);
        Matrix right = evaluate_word(k.second, x, dim);
        out += coeff_to_complex(c) * linalg::kron(left, right.transpose());
    }
    return out;
}

template <class Coeff>
Matrix evaluate_DF(const std::vector<std::vector<NcBiPoly<Coeff>>>& df,
                   const std::vector<Matrix>& x) {
    if (df.empty()) throw std::invalid_argument("relation matrix: empty");
    long dim = x.empty() ? 1 : x.front().rows();
    long block = dim * dim;
    long rows = static_cast<long>(df.size()), cols = static_cast<long>(df.front().size());
    Matrix out = Matrix::Zero(rows * block, cols * block);
    for (long i = 0; i < rows; ++i) {
        if (static_cast<long>(df[i].size()) != cols)
            throw std::invalid_argument("relation matrix: ragged rows");
        for (long j = 0; j < cols; ++j)
            out.block(i * block, j * block, block, block) = evaluate_bipoly(df[i][j], x);
    }
    return out;
}

struct RankDefectReport {
    long rank = 0;
    double kernel_fraction = 0.0;  // kernel dimension over N^2
    double det_plus = 1.0;
    double sigma_min_kept = 0.0;
    double sigma_max_dropped = 0.0;
    double threshold = 0.0;
};

// rank / pseudo-determinant summary of an evaluated relation matrix; the
// threshold knob matches the pseudo-determinant convention (relative to the
// top singular value, default max(rows, cols) * machine epsilon)
inline RankDefectReport rank_defect_report(const Matrix& m, long n, double rel_threshold = -1.0) {
    if (n < 1) throw std::invalid_argument("rank defect: base dimension must be positive");
    Eigen::JacobiSVD<Matrix> svd(m);
    auto sv = svd.singularValues();
    double top = sv.size() ? sv(0) : 0.0;
    double rel = rel_threshold >= 0.0
                     ? rel_threshold
                     : static_cast<double>(std::max(m.rows(), m.cols())) *
                           std::numeric_limits<double>::epsilon();
    RankDefectReport r;
    r.threshold = rel * top;
    double log_det = 0.0;
    for (long i = 0; i < sv.size(); ++i) {
        if (sv(i) > r.threshold && sv(i) > 0.0) {
            ++r.rank;
            log_det += std::log(sv(i));
            r.sigma_min_kept = sv(i);
        } else {
            r.sigma_max_dropped = std::max(r.sigma_max_dropped, sv(i));
        }
    }
    r.det_plus = std::exp(log_det);
    r.kernel_fraction =
        static_cast<double>(m.cols() - r.rank) / static_cast<double>(n * n);
    return r;
}

// ---- laws ----

struct Law {
    int variables = 0;
    int degree_cap = 6;
    std::vector<bool> self_adjoint;
    std::map<Monomial, Complex> moments;
};

namespace detail {

inline void all_words(int letters, int max_len, Monomial& w, std::vector<Monomial>& out) {
    out.push_back(w);
    if (static_cast<int>(w.size()) == max_len) return;
    for (int l = 0; l < letters; ++l) {
        w.push_back(l);
        all_words(letters, max_len, w, out);
        w.pop_back();
    }
}

}  // namespace detail

inline Law law_of(const std::vector<Matrix>& x, std::vector<bool> self_adjoint,
                  int degree_cap = 6) {
    Law law;
    law.variables = static_cast<int>(x.size());
    law.degree_cap = degree_cap;
    if (self_adjoint.empty()) self_adjoint.assign(x.size(), false);
    law.self_adjoint = self_adjoint;
    long dim = x.empty() ? 1 : x.front().rows();
    Monomial w;
    std::vector<Monomial> words;
    detail::all_words(2 * law.variables, degree_cap, w, words);
    for (auto& word : words) {
        bool uses_redundant_star = false;
        for (int code : word)
            if (letter_starred(code) && self_adjoint[letter_variable(code)])
                uses_redundant_star = true;
        if (uses_redundant_star) continue;  // canonical words only
        law.moments[word] = linalg::normalized_trace(evaluate_word(word, x, dim));
    }
    return law;
}

// Gram matrix tau(u* v) over all canonical words of degree <= cap / 2
inline Matrix moment_matrix(const Law& law) {
    std::vector<Monomial> basis;
    for (auto& [w, v] : law.moments)
        if (static_cast<int>(w.size()) <= law.degree_cap / 2) basis.push_back(w);
    Matrix g(basis.size(), basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j) {
            Monomial w = star_word(basis[i], law.self_adjoint);
            w.insert(w.end(), basis[j].begin(), basis[j].end());
            auto it = law.moments.find(w);
            if (it == law.moments.end())
                throw std::logic_error("law: moment table is missing a product word");
            g(i, j) = it->second;
        }
    return g;
}

// ---- text grammar ----
//
//   expr   := term (('+' | '-') term)*
//   term   := factor+                      (juxtaposition is multiplication)
//   factor := atom ('^' INT)? ('*')?
//   atom   := 's' INT | INT | 'c(' INT ';' INT (',' INT)* ')' | '(' expr ')'
//
// Variables are 1-based in the text. c(m; a0,a1,...) is the cyclotomic
// integer with the given power-basis coefficients at conductor m.

namespace detail {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;
    int vars;

    explicit Parser(const std::string& t, int r) : text(t), vars(r) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }

    bool eat(char c) {
        if (!peek(c)) return false;
        ++pos;
        return true;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw SchemaError("polynomial: " + what + " at offset " + std::to_string(pos) +
                          " in \"" + text + "\"");
    }

    long long integer() {
        skip_ws();
        std::size_t start = pos;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(
                                                    text[start]))))
            fail("expected an integer");
        return std::stoll(text.substr(start, pos - start));
    }

    ExactPoly atom() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            ExactPoly inner = expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (c == 's') {
            ++pos;
            long long idx = integer();
            if (idx < 1 || idx > vars) fail("variable index out of range");
            return ExactPoly::variable(vars, static_cast<int>(idx - 1));
        }
        if (c == 'c') {
            ++pos;
            if (!eat('(')) fail("expected '(' after 'c'");
            long long m = integer();
            if (!eat(';')) fail("expected ';' in cyclotomic literal");
            std::vector<long long> coeff;
            coeff.push_back(integer());
            while (eat(',')) coeff.push_back(integer());
            if (!eat(')')) fail("expected ')' closing cyclotomic literal");
            if (m < 1) fail("conductor must be positive");
            return ExactPoly::constant(vars,
                                       CycInt::from_coefficients(static_cast<int>(m), coeff));
        }
        if (std::isdigit(static_cast<unsigned char>(c)))
            return ExactPoly::constant(vars, CycInt(integer()));
        fail("unexpected character");
    }

    ExactPoly factor() {
        ExactPoly base = atom();
        skip_ws();
        if (eat('^')) {
            long long e = integer();
            if (e < 0) fail("negative exponent");
            ExactPoly p = ExactPoly::constant(vars, CycInt(1));
            for (long long i = 0; i < e; ++i) p = p * base;
            base = p;
        }
        if (eat('*')) base = base.adjoint();
        return base;
    }

    bool starts_factor() {
        skip_ws();
        if (pos >= text.size()) return false;
        char c = text[pos];
        return c == '(' || c == 's' || c == 'c' ||
               std::isdigit(static_cast<unsigned char>(c));
    }

    ExactPoly term() {
        ExactPoly p = factor();
        while (starts_factor()) p = p * factor();
        return p;
    }

    ExactPoly expr() {
        bool negate = false;
        skip_ws();
        if (eat('-')) negate = true;
        else eat('+');
        ExactPoly p = term();
        if (negate) p = ExactPoly::constant(vars, CycInt(-1)) * p;
        while (true) {
            skip_ws();
            if (eat('+')) {
                p = p + term();
            } else if (eat('-')) {
                p = p - term();
            } else {
                break;
            }
        }
        return p;
    }
};

}  // namespace detail

inline ExactPoly parse_poly(const std::string& text, int r) {
    detail::Parser parser(text, r);
    ExactPoly p = parser.expr();
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    return p;
}

inline Poly parse_complex_poly(const std::string& text, int r) {
    return parse_poly(text, r).map_coefficients([](const CycInt& c) { return c.to_complex(); });
}

}  // namespace permtraffic::ncpoly
