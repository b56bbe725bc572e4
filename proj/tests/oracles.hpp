#pragma once

// Reference computations used by the tests. Each one goes by a different route than
// the library: explicit index loops, closed forms, or Eigen's general (non-Hermitian)
// eigensolver.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;
using V = Eigen::VectorXcd;

/// Kronecker product, first factor most significant.
inline M kron(const M &a, const M &b) {
    M out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

inline V kron(const V &a, const V &b) {
    V out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index k = 0; k < b.size(); ++k)
            out(i * b.size() + k) = a(i) * b(k);
    return out;
}

/// Tr_B of an operator on A (x) B.
inline M trace_second(const M &rho, Eigen::Index da, Eigen::Index db) {
    M out = M::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            for (Eigen::Index k = 0; k < db; ++k)
                out(i, j) += rho(i * db + k, j * db + k);
    return out;
}

/// Tr_A of an operator on A (x) B.
inline M trace_first(const M &rho, Eigen::Index da, Eigen::Index db) {
    M out = M::Zero(db, db);
    for (Eigen::Index k = 0; k < db; ++k)
        for (Eigen::Index l = 0; l < db; ++l)
            for (Eigen::Index i = 0; i < da; ++i)
                out(k, l) += rho(i * db + k, i * db + l);
    return out;
}

/// Eigenvalues through the general complex eigensolver (real parts).
inline std::vector<double> eigenvalues(const M &m) {
    Eigen::ComplexEigenSolver<M> solver(m);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(solver.eigenvalues()(i).real());
    }
    return out;
}

inline double entropy_bits(const M &rho) {
    double h = 0.0;
    for (double x : eigenvalues(rho)) {
        if (x > 1e-15) {
            h -= x * std::log2(x);
        }
    }
    return h;
}

inline double shannon_bits(const std::vector<double> &p) {
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) {
            h -= x * std::log2(x);
        }
    }
    return h;
}

inline double binary_entropy(double p) {
    return shannon_bits({p, 1.0 - p});
}

/// Qubit fidelity: Tr(rho sigma) + 2 sqrt(det rho det sigma).
inline double qubit_fidelity(const M &rho, const M &sigma) {
    const double overlap = (rho * sigma).trace().real();
    const double dr = rho.determinant().real();
    const double ds = sigma.determinant().real();
    return overlap + 2.0 * std::sqrt(std::max(0.0, dr * ds));
}

inline M projector(const V &v) {
    return v * v.adjoint();
}

inline V basis(Eigen::Index n, Eigen::Index k) {
    return V::Unit(n, k);
}

}  // namespace oracle
