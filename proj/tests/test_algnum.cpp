// Exact cyclotomic arithmetic is checked against the numeric embedding
// (every ring operation must commute with evaluating zeta_m at the primitive
// root), against textbook cyclotomic polynomial tables, and against dense
// SVD for the norm and pseudo-determinant claims.

#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include <permtraffic/algnum.hpp>
#include <permtraffic/cyclotomic.hpp>
#include <permtraffic/errors.hpp>
#include <permtraffic/linalg.hpp>
#include <permtraffic/ncpoly.hpp>
#include <permtraffic/rng.hpp>

namespace {

using permtraffic::ResourceError;
using permtraffic::cyc::CycInt;
using permtraffic::cyc::CycMatrix;
using permtraffic::linalg::Complex;
using permtraffic::linalg::Matrix;
using permtraffic::rng::CounterRng;

namespace algnum = permtraffic::algnum;
namespace cyc = permtraffic::cyc;
namespace linalg = permtraffic::linalg;
namespace ncpoly = permtraffic::ncpoly;

CycInt random_cyc(int m, CounterRng& g) {
    std::vector<long long> coeff(cyc::euler_phi(m));
    for (auto& c : coeff) c = static_cast<long long>(g.below(7)) - 3;
    return CycInt::from_coefficients(m, coeff);
}

CycMatrix random_cyc_matrix(int rows, int cols, int m, CounterRng& g) {
    CycMatrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a.at(i, j) = random_cyc(m, g);
    return a;
}

// direct numeric value of a coefficient list, independent of any reduction
Complex embed(int m, const std::vector<long long>& coeff) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i)
        s += static_cast<double>(coeff[i]) *
             std::exp(Complex(0.0, 2.0 * M_PI * static_cast<double>(i) / m));
    return s;
}

}  // namespace

TEST_CASE("cyclotomic polynomial table") {
    using permtraffic::cyc::detail::cyclotomic_poly;
    REQUIRE(cyclotomic_poly(1) == std::vector<long long>{-1, 1});
    REQUIRE(cyclotomic_poly(2) == std::vector<long long>{1, 1});
    REQUIRE(cyclotomic_poly(3) == std::vector<long long>{1, 1, 1});
    REQUIRE(cyclotomic_poly(4) == std::vector<long long>{1, 0, 1});
    REQUIRE(cyclotomic_poly(6) == std::vector<long long>{1, -1, 1});
    REQUIRE(cyclotomic_poly(8) == std::vector<long long>{1, 0, 0, 0, 1});
    REQUIRE(cyclotomic_poly(9) == std::vector<long long>{1, 0, 0, 1, 0, 0, 1});
    REQUIRE(cyclotomic_poly(12) == std::vector<long long>{1, 0, -1, 0, 1});

    REQUIRE(cyc::euler_phi(1) == 1);
    REQUIRE(cyc::euler_phi(2) == 1);
    REQUIRE(cyc::euler_phi(12) == 4);
    REQUIRE(cyc::euler_phi(360) == 96);
}

TEST_CASE("cyclotomic integer identities") {
    CycInt z3 = CycInt::zeta(3);
    CycInt z4 = CycInt::zeta(4);
    CycInt z6 = CycInt::zeta(6);

    CycInt s = z3 + z3 * z3;
    REQUIRE(s.is_integer());
    REQUIRE(s.integer_value() == -1);

    REQUIRE((z4 * z4) == CycInt(-1));
    REQUIRE((z6 * CycInt::zeta_power(6, 5)) == CycInt(1));

    // the sixth root lives in the third cyclotomic ring; lowering the
    // conductor must not move the embedded value
    REQUIRE(z6.conductor() == 3);
    REQUIRE(std::abs(z6.to_complex() - std::exp(Complex(0.0, M_PI / 3.0))) < 1e-12);

    REQUIRE(CycInt::zeta_power(5, 7) == CycInt::zeta_power(5, 2));
    REQUIRE(CycInt::zeta_power(5, 5) == CycInt(1));
    REQUIRE(CycInt().is_zero());
    REQUIRE(CycInt::zeta(8).conductor() == 8);
}

TEST_CASE("ring operations commute with the numeric embedding") {
    CounterRng g(71, 0, 0);
    for (int m : {1, 4, 9, 12}) {
        for (int rep = 0; rep < 6; ++rep) {
            std::vector<long long> ca(cyc::euler_phi(m)), cb(cyc::euler_phi(m));
            for (auto& c : ca) c = static_cast<long long>(g.below(9)) - 4;
            for (auto& c : cb) c = static_cast<long long>(g.below(9)) - 4;
            CycInt a = CycInt::from_coefficients(m, ca);
            CycInt b = CycInt::from_coefficients(m, cb);
            Complex va = embed(m, ca), vb = embed(m, cb);
            REQUIRE(std::abs(a.to_complex() - va) < 1e-9);
            REQUIRE(std::abs((a + b).to_complex() - (va + vb)) < 1e-9);
            REQUIRE(std::abs((a * b).to_complex() - va * vb) < 1e-9);
            REQUIRE(std::abs((a - b).to_complex() - (va - vb)) < 1e-9);
            REQUIRE(std::abs(a.conj().to_complex() - std::conj(va)) < 1e-9);
            for (int k : cyc::units_mod(m)) {
                Complex want = 0.0;
                for (std::size_t i = 0; i < ca.size(); ++i)
                    want += static_cast<double>(ca[i]) *
                            std::exp(Complex(0.0, 2.0 * M_PI * double(i) * k / m));
                REQUIRE(std::abs(a.galois(k).to_complex() - want) < 1e-9);
            }
        }
    }
}

TEST_CASE("galois maps are ring maps") {
    CounterRng g(72, 0, 0);
    int m = 12;
    for (int rep = 0; rep < 5; ++rep) {
        CycInt a = random_cyc(m, g), b = random_cyc(m, g);
        for (int k : cyc::units_mod(m)) {
            REQUIRE((a + b).galois(k) == a.galois(k) + b.galois(k));
            REQUIRE((a * b).galois(k) == a.galois(k) * b.galois(k));
            REQUIRE(a.galois(k).conj() == a.conj().galois(k));
        }
        REQUIRE(a.galois(5).galois(7) == a.galois(35));
    }
}

TEST_CASE("conductor ceiling") {
    REQUIRE_THROWS_AS(CycInt::zeta(361), ResourceError);
    CycInt a = CycInt::zeta(16), b = CycInt::zeta(45);
    REQUIRE_THROWS_AS(a * b, ResourceError);  // lcm 720
    REQUIRE((CycInt::zeta(8) * CycInt::zeta(45)).conductor() <= 360);
}

TEST_CASE("cyclotomic matrices") {
    CounterRng g(73, 0, 0);
    CycMatrix a = random_cyc_matrix(3, 3, 4, g);
    CycMatrix b = random_cyc_matrix(3, 3, 4, g);

    SECTION("ring operations match the numeric embedding") {
        Matrix na = a.to_complex_matrix(), nb = b.to_complex_matrix();
        REQUIRE(((a * b).to_complex_matrix() - na * nb).norm() < 1e-9);
        REQUIRE(((a + b).to_complex_matrix() - (na + nb)).norm() < 1e-9);
        REQUIRE((a.adjoint().to_complex_matrix() - na.adjoint()).norm() < 1e-9);
    }

    SECTION("galois maps act entrywise and respect products and adjoints") {
        int m = (a * b).conductor();
        for (int k : cyc::units_mod(m)) {
            REQUIRE((a * b).galois(k) == a.galois(k) * b.galois(k));
            REQUIRE(a.adjoint().galois(k) == a.galois(k).adjoint());
        }
    }

    SECTION("kron and direct sum match the numeric forms") {
        CycMatrix small = random_cyc_matrix(2, 2, 3, g);
        REQUIRE((cyc::kron(a, small).to_complex_matrix() -
                 linalg::kron(a.to_complex_matrix(), small.to_complex_matrix()))
                    .norm() < 1e-9);
        CycMatrix ds = cyc::direct_sum(a, small);
        REQUIRE(ds.rows() == 5);
        REQUIRE(ds.at(3, 3) == small.at(0, 0));
        REQUIRE(ds.at(0, 4).is_zero());
        REQUIRE(ds.trace() == a.trace() + small.trace());
    }
}

TEST_CASE("operator norm upper estimate") {
    CounterRng g(74, 0, 0);
    REQUIRE(algnum::op_norm_upper(Matrix::Identity(4, 4)) >= 1.0 - 1e-9);
    REQUIRE(algnum::op_norm_upper(Matrix::Identity(4, 4)) <= 1.0 + 1e-5);
    REQUIRE(algnum::op_norm_upper(Matrix::Zero(3, 3)) == 0.0);
    for (int rep = 0; rep < 8; ++rep) {
        Matrix x(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) x(i, j) = Complex(g.gaussian(), g.gaussian());
        double truth = linalg::op_norm(x);
        double upper = algnum::op_norm_upper(x);
        REQUIRE(upper >= truth - 1e-8);
        REQUIRE(upper <= truth * (1.0 + 1e-4) + 1e-8);
    }
}

TEST_CASE("galois orbits") {
    CounterRng g(75, 0, 0);

    SECTION("integer matrices are fixed") {
        CycMatrix a(2, 2);
        a.at(0, 0) = CycInt(2);
        a.at(0, 1) = CycInt(-1);
        a.at(1, 1) = CycInt(3);
        auto orbit = algnum::galois_orbit(a);
        REQUIRE(orbit.orbit_size == 1);
        REQUIRE(orbit.norm_bound >=
                linalg::op_norm(a.to_complex_matrix()) - 1e-9);
        REQUIRE(orbit.norm_bound <=
                linalg::op_norm(a.to_complex_matrix()) * (1 + 1e-4) + 1e-8);
    }

    SECTION("a primitive cube root has the two conjugates") {
        CycMatrix a(1, 1);
        a.at(0, 0) = CycInt::zeta(3);
        auto orbit = algnum::galois_orbit(a);
        REQUIRE(orbit.orbit_size == 2);
        REQUIRE(orbit.norm_bound == Catch::Approx(1.0).margin(1e-6));
    }

    SECTION("orbit size is at most the unit group order") {
        CycMatrix a = random_cyc_matrix(2, 2, 12, g);
        auto orbit = algnum::galois_orbit(a);
        REQUIRE(orbit.orbit_size >= 1);
        REQUIRE(orbit.orbit_size <= cyc::euler_phi(12));
        auto star_orbit = algnum::galois_orbit(a.adjoint());
        REQUIRE(star_orbit.orbit_size == orbit.orbit_size);
    }
}

TEST_CASE("pseudo-determinant") {
    CounterRng g(76, 0, 0);

    REQUIRE(algnum::det_plus(Matrix::Identity(5, 5)) == Catch::Approx(1.0));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    REQUIRE(algnum::det_plus(d) == Catch::Approx(2.0));
    auto zero_report = algnum::det_plus_report(Matrix::Zero(3, 3));
    REQUIRE(zero_report.value == 1.0);
    REQUIRE(zero_report.rank == 0);

    Matrix x(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = Complex(g.gaussian(), g.gaussian());

    SECTION("invariant under permutation conjugation") {
        Matrix p = Matrix::Zero(3, 3);
        p(0, 2) = p(1, 0) = p(2, 1) = 1.0;
        REQUIRE(algnum::det_plus(Matrix(p * x * p.transpose())) ==
                Catch::Approx(algnum::det_plus(x)).epsilon(1e-9));
    }

    SECTION("squares to the pseudo-determinant of the absolute square") {
        REQUIRE(algnum::det_plus(Matrix(x.adjoint() * x)) ==
                Catch::Approx(algnum::det_plus(x) * algnum::det_plus(x)).epsilon(1e-9));
    }

    SECTION("rectangular input uses the singular values") {
        Matrix r(2, 3);
        r << 1, 0, 0, 0, 2, 0;
        REQUIRE(algnum::det_plus(r) == Catch::Approx(2.0));
    }
}

TEST_CASE("orbit determinant bound") {
    SECTION("permutation matrices sit at equality") {
        CycMatrix p(3, 3);
        p.at(0, 1) = CycInt(1);
        p.at(1, 2) = CycInt(1);
        p.at(2, 0) = CycInt(1);
        auto orbit = algnum::galois_orbit(p);
        REQUIRE(orbit.orbit_size == 1);
        double bound = algnum::orbit_determinant_bound(orbit);
        REQUIRE(bound == Catch::Approx(1.0));
        REQUIRE(algnum::det_plus(p) == Catch::Approx(1.0));
    }

    SECTION("unipotent with a cube root off the diagonal") {
        CycMatrix a(2, 2);
        a.at(0, 0) = CycInt(1);
        a.at(0, 1) = CycInt::zeta(3);
        a.at(1, 1) = CycInt(1);
        auto orbit = algnum::galois_orbit(a);
        REQUIRE(orbit.orbit_size == 2);
        double c_true = 0.0;
        for (auto& conj : orbit.conjugates)
            c_true = std::max(c_true, linalg::op_norm(conj.to_complex_matrix()));
        double bound = algnum::orbit_determinant_bound(orbit);
        REQUIRE(bound <= std::pow(c_true, -3.0) + 1e-9);
        REQUIRE(bound >= std::pow(c_true, -3.0) * (1 - 1e-3));
        double lhs = std::pow(algnum::det_plus(a), 1.0 / 2.0);
        REQUIRE(lhs >= bound - 1e-9);
    }

    SECTION("zero matrix uses the empty-product conventions") {
        CycMatrix z(2, 2);
        auto orbit = algnum::galois_orbit(z);
        REQUIRE(algnum::orbit_determinant_bound(orbit) == 1.0);
        REQUIRE(algnum::det_plus(z) == 1.0);
    }

    SECTION("random batch never violates the inequality") {
        CounterRng g(77, 0, 0);
        for (int rep = 0; rep < 30; ++rep) {
            int m = std::vector<int>{1, 2, 3, 4, 6}[rep % 5];
            int n = 2 + static_cast<int>(g.below(3));
            CycMatrix a = random_cyc_matrix(n, n, m, g);
            auto orbit = algnum::galois_orbit(a);
            double lhs = std::pow(algnum::det_plus(a), 1.0 / n);
            REQUIRE(lhs >= algnum::orbit_determinant_bound(orbit) - 1e-9);
        }
    }
}

TEST_CASE("crossed product microstates") {
    SECTION("n = 1 collapses to the scalar") {
        auto cp = algnum::crossed_product_microstate(1);
        REQUIRE(cp.generators.size() == 1);
        REQUIRE(cp.generators[0].rows() == 1);
        REQUIRE(cp.generators[0].at(0, 0) == CycInt(1));
    }

    for (int n : {2, 3}) {
        DYNAMIC_SECTION("exact relations at n = " << n) {
            auto cp = algnum::crossed_product_microstate(n);
            REQUIRE(static_cast<int>(cp.generators.size()) == n * n);

            for (auto& p : cp.generators) {
                REQUIRE(p.rows() == n * n);
                for (int i = 0; i < n * n; ++i) {
                    int nonzero_row = 0, nonzero_col = 0;
                    for (int j = 0; j < n * n; ++j) {
                        if (!p.at(i, j).is_zero()) {
                            ++nonzero_row;
                            bool is_root = false;
                            for (int e = 0; e < n; ++e)
                                if (p.at(i, j) == CycInt::zeta_power(n, e)) is_root = true;
                            REQUIRE(is_root);
                        }
                        if (!p.at(j, i).is_zero()) ++nonzero_col;
                    }
                    REQUIRE(nonzero_row == 1);
                    REQUIRE(nonzero_col == 1);
                }
            }

            for (int chi1 = 0; chi1 < n; ++chi1)
                for (int g1 = 0; g1 < n; ++g1)
                    for (int chi2 = 0; chi2 < n; ++chi2)
                        for (int g2 = 0; g2 < n; ++g2) {
                            CycMatrix lhs = cp.at(chi1, g1) * cp.at(chi2, g2);
                            CycMatrix rhs =
                                CycInt::zeta_power(n, static_cast<long long>(chi2) * g1) *
                                cp.at(chi1 + chi2, g1 + g2);
                            REQUIRE(lhs == rhs);
                        }

            for (int chi = 0; chi < n; ++chi)
                for (int g = 0; g < n; ++g) {
                    const CycMatrix& p = cp.at(chi, g);
                    CycMatrix star = CycInt::zeta_power(n, static_cast<long long>(chi) * g) *
                                     cp.at(-chi, -g);
                    REQUIRE(p.adjoint() == star);
                    REQUIRE(p * p.adjoint() == CycMatrix::identity(n * n));
                    // diagonal projection equals the abstract trace exactly
                    CycMatrix want = cp.abstract_trace(chi, g) * CycMatrix::identity(n * n);
                    REQUIRE(p.diag_part() == want);
                    CycInt tr = p.trace();
                    REQUIRE(tr == CycInt(static_cast<long long>(n) * n) *
                                      cp.abstract_trace(chi, g));
                }

            // the character action: v_g^* u_chi v_g = zeta^{-chi g} u_chi
            for (int chi = 0; chi < n; ++chi)
                for (int g = 0; g < n; ++g) {
                    CycMatrix lhs = cp.at(0, g).adjoint() * cp.at(chi, 0) * cp.at(0, g);
                    CycMatrix rhs = CycInt::zeta_power(
                                        n, -static_cast<long long>(chi) * g) *
                                    cp.at(chi, 0);
                    REQUIRE(lhs == rhs);
                }
        }
    }

    SECTION("entries at n = 2 are signs") {
        auto cp = algnum::crossed_product_microstate(2);
        for (auto& p : cp.generators)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const CycInt& e = p.at(i, j);
                    REQUIRE((e.is_zero() || e == CycInt(1) || e == CycInt(-1)));
                }
    }

    SECTION("random word traces match the abstract fold") {
        CounterRng g(78, 0, 0);
        int n = 3;
        auto cp = algnum::crossed_product_microstate(n);
        for (int rep = 0; rep < 10; ++rep) {
            int len = 1 + static_cast<int>(g.below(4));
            CycMatrix prod = CycMatrix::identity(n * n);
            int chi_sum = 0, g_sum = 0;
            long long phase = 0;
            for (int i = 0; i < len; ++i) {
                int chi = static_cast<int>(g.below(n)), gg = static_cast<int>(g.below(n));
                prod = prod * cp.at(chi, gg);
                phase += static_cast<long long>(chi) * g_sum;  // new letter passes the old v's
                chi_sum += chi;
                g_sum += gg;
            }
            CycInt want = (chi_sum % n == 0 && g_sum % n == 0)
                              ? CycInt(static_cast<long long>(n) * n) *
                                    CycInt::zeta_power(n, phase)
                              : CycInt(0);
            REQUIRE(prod.trace() == want);
        }
    }
}

TEST_CASE("direct sum microstates") {
    auto cp = algnum::crossed_product_microstate(2);
    std::vector<CycMatrix> tuple{cp.at(1, 0), cp.at(0, 1)};

    SECTION("single part of weight one is unchanged plus its projection") {
        algnum::WeightedTuple part{tuple, 1, 1};
        auto out = algnum::direct_sum_microstates({part});
        REQUIRE(out.dim == 4);
        REQUIRE(out.multiplicities == std::vector<long long>{1});
        REQUIRE(out.matrices.size() == 2);
        REQUIRE(out.matrices[0] == tuple[0]);
        REQUIRE(out.block_projections.size() == 1);
        REQUIRE(out.block_projections[0] == CycMatrix::identity(4));
    }

    SECTION("equal weights on equal dimensions use one copy each") {
        algnum::WeightedTuple a{tuple, 1, 2}, b{tuple, 1, 2};
        auto out = algnum::direct_sum_microstates({a, b});
        REQUIRE(out.dim == 8);
        REQUIRE(out.multiplicities == std::vector<long long>{1, 1});
        REQUIRE(out.block_projections[0].trace() == CycInt(4));
        REQUIRE(out.block_projections[1].trace() == CycInt(4));
        // the two embedded copies of the same generator commute
        REQUIRE(out.matrices[0] * out.matrices[2] == out.matrices[2] * out.matrices[0]);
    }

    SECTION("thirds on two-dimensional parts give the documented schedule") {
        CycMatrix x(2, 2);
        x.at(0, 1) = CycInt(1);
        x.at(1, 0) = CycInt(1);
        algnum::WeightedTuple a{{x}, 1, 3}, b{{x}, 2, 3};
        auto out = algnum::direct_sum_microstates({a, b});
        REQUIRE(out.dim == 6);
        REQUIRE(out.multiplicities == std::vector<long long>{1, 2});
        REQUIRE(out.block_projections[0].trace() == CycInt(2));
        REQUIRE(out.block_projections[1].trace() == CycInt(4));
    }

    SECTION("weights reduced or not agree") {
        CycMatrix x = CycMatrix::identity(2);
        algnum::WeightedTuple a{{x}, 2, 4}, b{{x}, 1, 2};
        auto out = algnum::direct_sum_microstates({a, b});
        REQUIRE(out.multiplicities == std::vector<long long>{1, 1});
    }

    SECTION("bad weights are rejected") {
        algnum::WeightedTuple a{tuple, 1, 2}, b{tuple, 1, 3};
        REQUIRE_THROWS_AS(algnum::direct_sum_microstates({a, b}), std::invalid_argument);
        algnum::WeightedTuple c{tuple, 1, 7919}, dpart{tuple, 7918, 7919};
        REQUIRE_THROWS_AS(algnum::direct_sum_microstates({c, dpart}, 64),
                          std::invalid_argument);
    }
}

TEST_CASE("tensor microstates") {
    auto cp = algnum::crossed_product_microstate(2);
    std::vector<CycMatrix> a{cp.at(1, 0)};
    std::vector<CycMatrix> b{cp.at(0, 1), cp.at(1, 1)};
    auto out = algnum::tensor_microstates(a, b);
    REQUIRE(out.size() == 3);
    REQUIRE(out[0].rows() == 16);

    REQUIRE(out[0] * out[1] == out[1] * out[0]);
    REQUIRE((out[0] * out[1]).trace() == a[0].trace() * b[0].trace());

    auto orbit_a = algnum::galois_orbit(a[0]);
    auto orbit_lift = algnum::galois_orbit(out[0]);
    REQUIRE(orbit_lift.orbit_size == orbit_a.orbit_size);
}

TEST_CASE("certificate tables") {
    SECTION("a single variable at permutation microstates gives ones") {
        CycMatrix p(3, 3);
        p.at(0, 1) = CycInt(1);
        p.at(1, 2) = CycInt(1);
        p.at(2, 0) = CycInt(1);
        auto poly = ncpoly::ExactPoly::variable(1, 0);
        auto table = algnum::liminf_certificate({{p}, {p * p}}, poly);
        REQUIRE(table.rows.size() == 2);
        for (auto& row : table.rows) {
            REQUIRE(row.det_plus_root == Catch::Approx(1.0));
            REQUIRE(row.orbit_size == 1);
        }
        REQUIRE(table.uniform_bound == Catch::Approx(1.0));
        REQUIRE(table.all_above);
    }

    SECTION("a vanishing relation degenerates to the empty product") {
        auto cp = algnum::crossed_product_microstate(2);
        auto u = cp.at(1, 0);
        auto rel = ncpoly::parse_poly("s1^2 - 1", 1);
        auto table = algnum::liminf_certificate({{u}}, rel);
        REQUIRE(table.rows[0].det_plus_root == Catch::Approx(1.0));
        REQUIRE(table.all_above);
    }
}

TEST_CASE("diagonal flatness deviations") {
    SECTION("scalars are flat") {
        Matrix s = 3.0 * Matrix::Identity(4, 4);
        auto dev = algnum::diag_constancy({s}, {ncpoly::Poly::variable(1, 0)});
        REQUIRE(dev.size() == 1);
        REQUIRE(dev[0] == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("crossed product monomials are exactly flat") {
        auto cp = algnum::crossed_product_microstate(3);
        std::vector<Matrix> x{cp.at(1, 0).to_complex_matrix(),
                              cp.at(0, 1).to_complex_matrix()};
        auto v1 = ncpoly::Poly::variable(2, 0), v2 = ncpoly::Poly::variable(2, 1);
        std::vector<ncpoly::Poly> polys{v1, v2, v1 * v2, v2 * v1 * v1,
                                        v1 * v2.adjoint() * v1};
        for (double dev : algnum::diag_constancy(x, polys))
            REQUIRE(dev == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("a transposition with a fixed point has the hand value") {
        Matrix p = Matrix::Zero(3, 3);
        p(0, 1) = p(1, 0) = p(2, 2) = 1.0;
        auto dev = algnum::diag_constancy({p}, {ncpoly::Poly::variable(1, 0)});
        // Delta - tr I = diag(-1/3, -1/3, 2/3); normalized 2-norm sqrt(2/9)
        REQUIRE(dev[0] == Catch::Approx(std::sqrt(2.0 / 9.0)).epsilon(1e-12));
    }
}
