#pragma once

// Small dense complex linear-algebra helpers on top of Eigen.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <string>

#include "teeter/errors.hpp"

namespace teeter {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

inline void require_square(const cmat& m, const std::string& what) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw structural_error(what + ": expected a nonempty square matrix, got " +
                               std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void require_same_dim(const cmat& a, const cmat& b, const std::string& what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw structural_error(what + ": dimension mismatch (" + std::to_string(a.rows()) + " vs " +
                               std::to_string(b.rows()) + ")");
}

/// Largest absolute entry, the max-norm used by all tolerance checks.
inline double max_abs(const cmat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const cmat& m) { return max_abs(m - m.adjoint()); }

inline cmat hermitian_part(const cmat& m) { return 0.5 * (m + m.adjoint()); }

/// Eigenvalues (ascending) of a Hermitian matrix.
inline rvec hermitian_eigenvalues(const cmat& m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in [-clamp_tol, 0) are treated as rounding noise and set to zero,
/// as are positive ones below the eigensolver's resolution n * eps * max|ev|;
/// otherwise sqrt would lift 1e-17 noise to 3e-9.
inline cmat psd_sqrt(const cmat& m, double clamp_tol = 1e-9) {
    require_square(m, "psd_sqrt");
    Eigen::SelfAdjointEigenSolver<cmat> es(m);
    rvec ev = es.eigenvalues();
    if (ev.minCoeff() < -clamp_tol)
        throw validation_error("psd_sqrt: matrix is not positive semidefinite (eigenvalue " +
                               std::to_string(ev.minCoeff()) + ")");
    const double floor = static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() * ev.cwiseAbs().maxCoeff();
    for (auto& e : ev) e = e <= floor ? 0.0 : std::sqrt(e);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Largest singular value.
inline double operator_norm(const cmat& a) {
    require_square(a, "operator_norm");
    Eigen::JacobiSVD<cmat> svd(a);
    return svd.singularValues()(0);
}

inline cmat kron(const cmat& a, const cmat& b) {
    cmat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline cvec kron(const cvec& a, const cvec& b) {
    cvec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline cmat direct_sum(std::initializer_list<cmat> blocks) {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.rows();
    cmat out = cmat::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        out.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    return out;
}

/// Factor exchange S|i>|j> = |j>|i> on C^d (x) C^d.
inline cmat swap_operator(Eigen::Index d) {
    cmat s = cmat::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) s(j * d + i, i * d + j) = 1.0;
    return s;
}

inline cmat projector_onto(const cvec& v) {
    const cvec u = v / v.norm();
    return u * u.adjoint();
}

}  // namespace teeter
