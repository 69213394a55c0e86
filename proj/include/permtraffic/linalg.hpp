#pragma once

// Thin helpers over Eigen dense complex matrices: Kronecker products,
// diagonal projection, normalized traces and norms.

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace permtraffic::linalg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Conditional expectation onto the diagonal subalgebra.
inline Matrix delta(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("delta: square matrix required");
    return Matrix(a.diagonal().asDiagonal());
}

inline Complex normalized_trace(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("trace: square matrix required");
    if (a.rows() == 0) return 0.0;
    return a.trace() / static_cast<double>(a.rows());
}

// L2 norm under the normalized trace, (tr |a|^2)^(1/2).
inline double hs_norm(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    return a.norm() / std::sqrt(static_cast<double>(a.rows()));
}

inline double op_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    return a.jacobiSvd().singularValues()(0);
}

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

}  // namespace permtraffic::linalg
