#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace robustgate {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

inline Matrix2c pauli_x() {
    Matrix2c m;
    m << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    return m;
}

inline Matrix2c pauli_y() {
    Matrix2c m;
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline Matrix2c pauli_z() {
    Matrix2c m;
    m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
    return m;
}

/// 2x2 Hermitian matrix in the Pauli basis: ax*X + ay*Y + az*Z + a0*I.
struct Hermitian2 {
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;
    double a0 = 0.0;

    Matrix2c matrix() const {
        Matrix2c m;
        m << Complex(a0 + az, 0), Complex(ax, -ay), Complex(ax, ay), Complex(a0 - az, 0);
        return m;
    }
};

/// exp(-i t H) for a 2x2 Hermitian generator, in closed form.
///
/// With r = |(ax,ay,az)| the result is
///   e^{-i t a0} [cos(t r) I - i sin(t r)/r (ax X + ay Y + az Z)],
/// with sin(t r)/r -> t as r -> 0, so the zero-Pauli-norm case degenerates
/// to the global phase e^{-i t a0} I.
inline Matrix2c expm_su2(const Hermitian2& h, double t) {
    const double r = std::sqrt(h.ax * h.ax + h.ay * h.ay + h.az * h.az);
    const double c = std::cos(t * r);
    // sinc-safe sin(t r)/r
    const double s = (r > 0.0) ? std::sin(t * r) / r : t;
    const Complex phase = std::polar(1.0, -t * h.a0);
    Matrix2c u;
    u(0, 0) = phase * Complex(c, -s * h.az);
    u(0, 1) = phase * Complex(-s * h.ay, -s * h.ax);
    u(1, 0) = phase * Complex(s * h.ay, -s * h.ax);
    u(1, 1) = phase * Complex(c, s * h.az);
    return u;
}

namespace detail {

inline void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

inline void require_hermitian(const ComplexMatrix& m, const char* what) {
    require_square(m, what);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * scale)
        throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
}

}  // namespace detail

/// exp(-i t H) for an n x n Hermitian H via eigendecomposition,
/// V diag(e^{-i t lambda}) V^dagger. Unitary by construction.
inline ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
    detail::require_hermitian(h, "expm_hermitian");
    const ComplexMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("expm_hermitian: eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    Eigen::VectorXcd phases(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) phases(i) = std::polar(1.0, -t * lam(i));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Step propagator exp(-i t H) together with its directional derivative
/// dU = d/ds exp(-i t (H + s E)) at s = 0.
///
/// Both blocks come from one exponential of the 2n x 2n augmented matrix
/// [[A, B], [0, A]] with A = -i t H, B = -i t E; the upper-right block of
/// exp of that matrix is the Frechet derivative of exp at A in direction B.
inline std::pair<ComplexMatrix, ComplexMatrix> expm_frechet(const ComplexMatrix& h,
                                                            const ComplexMatrix& e,
                                                            double t) {
    detail::require_square(h, "expm_frechet");
    if (e.rows() != h.rows() || e.cols() != h.cols())
        throw std::invalid_argument("expm_frechet: dimension mismatch between H and E");
    const Eigen::Index n = h.rows();
    const Complex mit(0.0, -t);
    ComplexMatrix aug = ComplexMatrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = mit * h;
    aug.bottomRightCorner(n, n) = mit * h;
    aug.topRightCorner(n, n) = mit * e;
    const ComplexMatrix big = aug.exp();
    return {big.topLeftCorner(n, n), big.topRightCorner(n, n)};
}

/// Fixed-size fast path of expm_frechet for 2x2 generators (the inner loop
/// of gradient evaluation).
inline std::pair<Matrix2c, Matrix2c> expm_frechet2(const Matrix2c& h, const Matrix2c& e,
                                                   double t) {
    const Complex mit(0.0, -t);
    Matrix4c aug = Matrix4c::Zero();
    aug.topLeftCorner<2, 2>() = mit * h;
    aug.bottomRightCorner<2, 2>() = mit * h;
    aug.topRightCorner<2, 2>() = mit * e;
    const Matrix4c big = aug.exp();
    return {big.topLeftCorner<2, 2>(), big.topRightCorner<2, 2>()};
}

/// Max-entry deviation of U from unitarity, |U^dagger U - I|_max.
inline double unitarity_defect(const ComplexMatrix& u) {
    const ComplexMatrix d =
        u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

}  // namespace robustgate
