#pragma once

// Galois orbits of cyclotomic-integer matrices, pseudo-determinants, the
// orbit-size determinant lower bound, and the microstate constructions that
// certify it: crossed products of cyclic groups, direct sums with rational
// trace weights, and tensor embeddings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "permtraffic/cyclotomic.hpp"
#include "permtraffic/errors.hpp"
#include "permtraffic/linalg.hpp"
#include "permtraffic/ncpoly.hpp"

namespace permtraffic::algnum {

using cyc::CycInt;
using cyc::CycMatrix;
using linalg::Complex;
using linalg::Matrix;

// Upper estimate of the operator norm: power iteration on A*A from a fixed
// generic start, padded by a small factor, and capped by the certified
// bounds sqrt(norm_1 * norm_inf) and the Frobenius norm. Overestimating is
// safe where this is used; underestimating would weaken a certificate.
inline double op_norm_upper(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    double fro = a.norm();
    if (fro == 0.0) return 0.0;
    double n1 = 0.0, ninf = 0.0;
    for (long j = 0; j < a.cols(); ++j) n1 = std::max(n1, a.col(j).cwiseAbs().sum());
    for (long i = 0; i < a.rows(); ++i) ninf = std::max(ninf, a.row(i).cwiseAbs().sum());
    double certified = std::min(fro, std::sqrt(n1 * ninf));
    Matrix b = a.adjoint() * a;
    Eigen::VectorXcd v(b.rows());
    for (long i = 0; i < v.size(); ++i) v(i) = Complex(1.0 + 1e-3 * static_cast<double>(i), 0.0);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXcd w = b * v;
        double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        double next = std::real(v.dot(b * v));
        if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    double powered = std::sqrt(std::max(lambda, 0.0)) * (1.0 + 1e-6) + 1e-12;
    return std::min(certified, powered);
}

struct GaloisOrbit {
    CycMatrix base;
    std::vector<CycMatrix> conjugates;  // one per distinct image, base first
    int orbit_size = 0;                 // d
    double norm_bound = 0.0;            // C: max conjugate operator norm (upper estimate)
};

inline GaloisOrbit galois_orbit(const CycMatrix& a) {
    GaloisOrbit orbit;
    orbit.base = a;
    int m = a.conductor();
    for (int k : cyc::units_mod(m)) {
        CycMatrix image = a.galois(k);
        bool seen = false;
        for (auto& c : orbit.conjugates)
            if (c == image) {
                seen = true;
                break;
            }
        if (!seen) orbit.conjugates.push_back(std::move(image));
    }
    orbit.orbit_size = static_cast<int>(orbit.conjugates.size());
    for (auto& c : orbit.conjugates)
        orbit.norm_bound = std::max(orbit.norm_bound, op_norm_upper(c.to_complex_matrix()));
    return orbit;
}

struct DetPlusReport {
    double value = 1.0;  // product of the singular values above the threshold
    long rank = 0;
    double threshold = 0.0;
    double sigma_min_kept = 0.0;
    double sigma_max_dropped = 0.0;
};

// Pseudo-determinant: the product of nonzero singular values, where "zero"
// means below rel * sigma_max with rel defaulting to max(rows, cols) times
// the machine epsilon. The empty product (zero map) is 1.
inline DetPlusReport det_plus_report(const Matrix& a, double rel_threshold = -1.0) {
    DetPlusReport r;
    if (a.rows() == 0 || a.cols() == 0) return r;
    Eigen::JacobiSVD<Matrix> svd(a);
    auto sv = svd.singularValues();
    double top = sv.size() ? sv(0) : 0.0;
    double rel = rel_threshold >= 0.0
                     ? rel_threshold
                     : static_cast<double>(std::max(a.rows(), a.cols())) *
                           std::numeric_limits<double>::epsilon();
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
    r.value = r.rank ? std::exp(log_det) : 1.0;
    return r;
}

inline double det_plus(const Matrix& a, double rel_threshold = -1.0) {
    return det_plus_report(a, rel_threshold).value;
}

inline double det_plus(const CycMatrix& a, double rel_threshold = -1.0) {
    return det_plus(a.to_complex_matrix(), rel_threshold);
}

// the orbit lower bound: det_plus(A)^{1/N} >= C^{-d^2+1}; zero matrix -> 1
inline double orbit_determinant_bound(const GaloisOrbit& orbit) {
    if (orbit.base.rows() != orbit.base.cols())
        throw std::invalid_argument("orbit bound: base matrix must be square");
    if (orbit.norm_bound == 0.0) return 1.0;
    double d = static_cast<double>(orbit.orbit_size);
    return std::pow(orbit.norm_bound, 1.0 - d * d);
}

// ---- microstate constructions ----

// GNS matrices of the rotation-times-character algebra of Z/n: the basis is
// indexed by (theta, h) -> theta * n + h and the generator labelled (chi, g)
// acts by [(phi, k), (theta, h)] = zeta_n^{theta g} [phi = chi + theta]
// [k = g + h]. Every matrix is a generalized permutation with entries in
// {0} union the n-th roots of unity.
struct CrossedProduct {
    int n = 0;
    std::vector<CycMatrix> generators;  // indexed by chi * n + g

    int index(int chi, int g) const { return ((chi % n + n) % n) * n + ((g % n + n) % n); }
    const CycMatrix& at(int chi, int g) const { return generators[index(chi, g)]; }

    // the trace of the abstract element u_chi v_g
    CycInt abstract_trace(int chi, int g) const {
        return (chi % n == 0 && g % n == 0) ? CycInt(1) : CycInt(0);
    }
};

inline CrossedProduct crossed_product_microstate(int n) {
    if (n < 1) throw std::invalid_argument("crossed product: n must be positive");
    CrossedProduct cp;
    cp.n = n;
    for (int chi = 0; chi < n; ++chi)
        for (int g = 0; g < n; ++g) {
            CycMatrix p(n * n, n * n);
            for (int theta = 0; theta < n; ++theta)
                for (int h = 0; h < n; ++h) {
                    int phi = (chi + theta) % n;
                    int k = (g + h) % n;
                    p.at(phi * n + k, theta * n + h) =
                        CycInt::zeta_power(n, static_cast<long long>(theta) * g);
                }
            cp.generators.push_back(std::move(p));
        }
    return cp;
}

// one microstate tuple plus the rational weight it should carry in a sum
struct WeightedTuple {
    std::vector<CycMatrix> matrices;  // common square dimension
    long long weight_num = 1;
    long long weight_den = 1;
};

struct DirectSumMicrostates {
    int dim = 0;                             // total block dimension L
    std::vector<long long> multiplicities;   // copies of each part
    std::vector<CycMatrix> matrices;         // parts embedded block-diagonally
    std::vector<CycMatrix> block_projections;  // identity of each block
};

// Block-diagonal assembly X_1^{+t_1} + 0, 0 + X_2^{+t_2}, ... with the
// multiplicities chosen so block j carries trace weight exactly w_j. The
// projections onto the blocks are appended for downstream relations.
inline DirectSumMicrostates direct_sum_microstates(const std::vector<WeightedTuple>& parts,
                                                   long long dim_cap = 1 << 20) {
    if (parts.empty()) throw std::invalid_argument("direct sum: no parts");
    long long num_total = 0, den_lcm = 1;
    for (auto& p : parts) {
        if (p.weight_num <= 0 || p.weight_den <= 0)
            throw std::invalid_argument("direct sum: weights must be positive");
        if (p.matrices.empty()) throw std::invalid_argument("direct sum: empty tuple");
        int d = p.matrices.front().rows();
        for (auto& m : p.matrices)
            if (m.rows() != d || m.cols() != d)
                throw std::invalid_argument("direct sum: ragged part dimensions");
        den_lcm = std::lcm(den_lcm, p.weight_den);
    }
    for (auto& p : parts) num_total += p.weight_num * (den_lcm / p.weight_den);
    if (num_total != den_lcm)
        throw std::invalid_argument("direct sum: weights must sum to one");

    // smallest L with w_j * L divisible by the part dimension for every j
    long long L = 1;
    for (auto& p : parts) {
        long long d = p.matrices.front().rows();
        long long q = p.weight_den * d / std::gcd(p.weight_num, p.weight_den * d);
        L = std::lcm(L, q);
        if (L > dim_cap)
            throw std::invalid_argument("direct sum: no multiplicity schedule under the cap");
    }

    DirectSumMicrostates out;
    out.dim = static_cast<int>(L);
    std::vector<long long> block_dims;
    for (auto& p : parts) {
        long long d = p.matrices.front().rows();
        if ((p.weight_num * L) % (p.weight_den * d) != 0)
            throw std::logic_error("direct sum: multiplicity schedule is not integral");
        long long t = (p.weight_num * L) / (p.weight_den * d);
        out.multiplicities.push_back(t);
        block_dims.push_back(t * d);
    }
    long long offset = 0;
    for (std::size_t j = 0; j < parts.size(); ++j) {
        long long d = parts[j].matrices.front().rows();
        for (auto& x : parts[j].matrices) {
            CycMatrix big(out.dim, out.dim);
            for (long long copy = 0; copy < out.multiplicities[j]; ++copy) {
                long long base = offset + copy * d;
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        big.at(static_cast<int>(base + a), static_cast<int>(base + b)) =
                            x.at(a, b);
            }
            out.matrices.push_back(std::move(big));
        }
        CycMatrix proj(out.dim, out.dim);
        for (long long a = 0; a < block_dims[j]; ++a)
            proj.at(static_cast<int>(offset + a), static_cast<int>(offset + a)) = CycInt(1);
        out.block_projections.push_back(std::move(proj));
        offset += block_dims[j];
    }
    return out;
}

// (A_i (x) 1, 1 (x) B_j): commuting embeddings whose mixed traces factor
inline std::vector<CycMatrix> tensor_microstates(const std::vector<CycMatrix>& a,
                                                 const std::vector<CycMatrix>& b) {
    int da = a.empty() ? 1 : a.front().rows();
    int db = b.empty() ? 1 : b.front().rows();
    std::vector<CycMatrix> out;
    for (auto& x : a) out.push_back(cyc::kron(x, CycMatrix::identity(db)));
    for (auto& y : b) out.push_back(cyc::kron(CycMatrix::identity(da), y));
    return out;
}

// ---- certificates ----

struct LiminfRow {
    int k = 0;
    int n = 0;                 // matrix dimension at this step
    double det_plus_root = 0;  // det_plus(P(X))^{1/n}
    int orbit_size = 0;
    double norm_bound = 0.0;
    double bound = 0.0;  // per-step orbit bound
};

struct LiminfTable {
    std::vector<LiminfRow> rows;
    double uniform_bound = 0.0;  // from the worst C and d across the sequence
    bool all_above = true;
};

// Evaluates P exactly at each microstate tuple, forms the Galois orbit of
// the image, and tabulates det_plus^{1/n} against the certified lower bound.
inline LiminfTable liminf_certificate(
    const std::vector<std::vector<CycMatrix>>& microstates, const ncpoly::ExactPoly& p,
    double rel_threshold = -1.0) {
    if (microstates.empty()) throw std::invalid_argument("certificate: empty sequence");
    LiminfTable table;
    double worst_c = 0.0;
    int worst_d = 1;
    for (std::size_t k = 0; k < microstates.size(); ++k) {
        CycMatrix image = ncpoly::evaluate_exact(p, microstates[k]);
        GaloisOrbit orbit = galois_orbit(image);
        LiminfRow row;
        row.k = static_cast<int>(k);
        row.n = image.rows();
        row.det_plus_root =
            std::pow(det_plus(image, rel_threshold), 1.0 / static_cast<double>(row.n));
        row.orbit_size = orbit.orbit_size;
        row.norm_bound = orbit.norm_bound;
        row.bound = orbit_determinant_bound(orbit);
        worst_c = std::max(worst_c, orbit.norm_bound);
        worst_d = std::max(worst_d, orbit.orbit_size);
        table.rows.push_back(row);
    }
    table.uniform_bound =
        worst_c == 0.0 ? 1.0
                       : std::pow(worst_c, 1.0 - static_cast<double>(worst_d) *
                                                     static_cast<double>(worst_d));
    for (auto& row : table.rows)
        if (row.det_plus_root < table.uniform_bound - 1e-9) table.all_above = false;
    return table;
}

// per-polynomial || Delta(P(X)) - tr(P(X)) I ||_2, the diagonal-flatness
// deviation (normalized 2-norm)
inline std::vector<double> diag_constancy(const std::vector<Matrix>& x,
                                          const std::vector<ncpoly::Poly>& polys) {
    std::vector<double> out;
    for (auto& p : polys) {
        Matrix value = ncpoly::evaluate(p, x);
        Matrix dev = linalg::delta(value) -
                     linalg::normalized_trace(value) *
                         Matrix::Identity(value.rows(), value.cols());
        out.push_back(linalg::hs_norm(dev));
    }
    return out;
}

}  // namespace permtraffic::algnum
