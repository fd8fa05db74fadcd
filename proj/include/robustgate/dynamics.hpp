#pragma once

#include "robustgate/control_field.hpp"
#include "robustgate/gates.hpp"
#include "robustgate/qlinalg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace robustgate {

/// Step generator theta_k * omega_x * X + omega_z * Z of the qubit model.
inline Matrix2c qubit_step_hamiltonian(double theta_k, double omega_x, double omega_z) {
    Hermitian2 h;
    h.ax = theta_k * omega_x;
    h.az = omega_z;
    return h.matrix();
}

/// Final-time propagator of the piecewise-constant qubit model:
/// U_T = prod_{k=N..1} exp(-i h (theta_k omega_x X + omega_z Z)).
inline Matrix2c propagate(const ControlField& field, double omega_x, double omega_z) {
    field.validate();
    const double h = field.step();
    Matrix2c u = Matrix2c::Identity();
    for (int k = 0; k < field.size(); ++k) {
        Hermitian2 step;
        step.ax = field.values(k) * omega_x;
        step.az = omega_z;
        u = expm_su2(step, h) * u;
    }
    return u;
}

/// Final-time propagator on the fine grid of an n-level model,
/// U_T = prod_{m=M..1} exp(-i h~ (c_m H_c + w_m H_w)).
inline ComplexMatrix propagate_nlevel(const Eigen::VectorXd& c, const Eigen::VectorXd& w,
                                      const NLevelModel& model, double horizon) {
    if (c.size() != w.size())
        throw std::invalid_argument("propagate_nlevel: control and noise vectors differ in length");
    if (c.size() < 1) throw std::invalid_argument("propagate_nlevel: empty grid");
    model.validate();
    const int m_count = static_cast<int>(c.size());
    const double h = horizon / m_count;
    const int n = model.dim();

    if (n == 2) {
        // closed-form su(2) fast path
        const Matrix2c hc = model.control_op;
        const Matrix2c hw = model.noise_op;
        Matrix2c u = Matrix2c::Identity();
        for (int m = 0; m < m_count; ++m) {
            const Matrix2c gen = c(m) * hc + w(m) * hw;
            Hermitian2 p;
            p.ax = gen(0, 1).real();
            p.ay = gen(1, 0).imag();
            p.az = 0.5 * (gen(0, 0) - gen(1, 1)).real();
            p.a0 = 0.5 * (gen(0, 0) + gen(1, 1)).real();
            u = expm_su2(p, h) * u;
        }
        return u;
    }

    ComplexMatrix u = ComplexMatrix::Identity(n, n);
    for (int m = 0; m < m_count; ++m)
        u = expm_hermitian(c(m) * model.control_op + w(m) * model.noise_op, h) * u;
    return u;
}

/// Gate fidelity |Tr(W^dagger U)|^2 / n^2, phase-invariant, in [0, 1].
inline double fidelity(const ComplexMatrix& target, const ComplexMatrix& u) {
    if (target.rows() != u.rows() || target.cols() != u.cols())
        throw std::invalid_argument("fidelity: dimension mismatch");
    const auto n = static_cast<double>(target.rows());
    const Complex tr = (target.adjoint() * u).trace();
    return std::norm(tr) / (n * n);
}

inline double fidelity(const Matrix2c& target, const Matrix2c& u) {
    const Complex tr = (target.adjoint() * u).trace();
    return 0.25 * std::norm(tr);
}

inline double fidelity(const GateTarget& target, const Matrix2c& u) {
    return fidelity(target.matrix, u);
}

inline double qubit_fidelity(const ControlField& field, double omega_x, double omega_z,
                             const GateTarget& target) {
    return fidelity(target.matrix, propagate(field, omega_x, omega_z));
}

/// Normalized distance 1 - F.
inline double distance(const ComplexMatrix& target, const ComplexMatrix& u) {
    return 1.0 - fidelity(target, u);
}

namespace detail {

/// Gradient of F = |Tr(W^dagger U_L ... U_1)|^2 / n^2 with respect to the L
/// per-step scalars, given each step unitary and its derivative in its own
/// scalar. Assembled from prefix/suffix partial products.
template <typename Mat>
Eigen::VectorXd product_gradient(const std::vector<Mat>& steps, const std::vector<Mat>& dsteps,
                                 const Mat& target) {
    const int count = static_cast<int>(steps.size());
    std::vector<Mat> prefix(count + 1), suffix(count + 1);
    prefix[0] = Mat::Identity(target.rows(), target.cols());
    for (int k = 0; k < count; ++k) prefix[k + 1] = steps[k] * prefix[k];
    suffix[count] = Mat::Identity(target.rows(), target.cols());
    for (int k = count - 1; k >= 0; --k) suffix[k] = suffix[k + 1] * steps[k];

    const auto n2 = static_cast<double>(target.rows() * target.rows());
    const Complex z = (target.adjoint() * prefix[count]).trace();
    const Mat wadj = target.adjoint();

    Eigen::VectorXd grad(count);
    for (int k = 0; k < count; ++k) {
        const Complex zk = (wadj * suffix[k + 1] * dsteps[k] * prefix[k]).trace();
        grad(k) = 2.0 / n2 * (std::conj(z) * zk).real();
    }
    return grad;
}

/// Per-step unitaries and their theta_k-derivatives for the qubit model.
inline void qubit_steps(const ControlField& field, double omega_x, double omega_z,
                        std::vector<Matrix2c>& steps, std::vector<Matrix2c>& dsteps) {
    const double h = field.step();
    const Matrix2c dir = omega_x * pauli_x();
    const int n = field.size();
    steps.resize(n);
    dsteps.resize(n);
    for (int k = 0; k < n; ++k) {
        const Matrix2c gen = qubit_step_hamiltonian(field.values(k), omega_x, omega_z);
        auto [u, du] = expm_frechet2(gen, dir, h);
        steps[k] = u;
        dsteps[k] = du;
    }
}

/// Per-step unitaries and their w_m-derivatives on the fine grid.
template <typename Mat>
void noise_steps(const Eigen::VectorXd& c, const Eigen::VectorXd& w, const Mat& hc,
                 const Mat& hw, double h, std::vector<Mat>& steps, std::vector<Mat>& dsteps) {
    const int m_count = static_cast<int>(c.size());
    steps.resize(m_count);
    dsteps.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        const Mat gen = c(m) * hc + w(m) * hw;
        if constexpr (std::is_same_v<Mat, Matrix2c>) {
            auto [u, du] = expm_frechet2(gen, hw, h);
            steps[m] = u;
            dsteps[m] = du;
        } else {
            auto [u, du] = expm_frechet(gen, hw, h);
            steps[m] = u;
            dsteps[m] = du;
        }
    }
}

}  // namespace detail

/// Exact gradient of the qubit fidelity with respect to the command vector,
/// chain-ruled through per-step Frechet derivatives (direction omega_x X).
inline Eigen::VectorXd fidelity_gradient(const ControlField& field, double omega_x,
                                         double omega_z, const GateTarget& target) {
    field.validate();
    std::vector<Matrix2c> steps, dsteps;
    detail::qubit_steps(field, omega_x, omega_z, steps, dsteps);
    return detail::product_gradient<Matrix2c>(steps, dsteps, target.matrix);
}

/// Exact gradient of the n-level fidelity with respect to the fine-grid
/// noise vector w (direction H_w in every step).
inline Eigen::VectorXd noise_gradient(const Eigen::VectorXd& c, const Eigen::VectorXd& w,
                                      const NLevelModel& model, double horizon,
                                      const ComplexMatrix& target) {
    if (c.size() != w.size())
        throw std::invalid_argument("noise_gradient: control and noise vectors differ in length");
    model.validate();
    const double h = horizon / static_cast<double>(c.size());
    if (model.dim() == 2) {
        const Matrix2c hc = model.control_op;
        const Matrix2c hw = model.noise_op;
        const Matrix2c w2 = target;
        std::vector<Matrix2c> steps, dsteps;
        detail::noise_steps<Matrix2c>(c, w, hc, hw, h, steps, dsteps);
        return detail::product_gradient<Matrix2c>(steps, dsteps, w2);
    }
    std::vector<ComplexMatrix> steps, dsteps;
    detail::noise_steps<ComplexMatrix>(c, w, model.control_op, model.noise_op, h, steps, dsteps);
    return detail::product_gradient<ComplexMatrix>(steps, dsteps, target);
}

/// N x N Hessian of the qubit fidelity in theta, by central finite
/// differences of the analytic gradient; symmetrized.
inline Eigen::MatrixXd fidelity_hessian_theta(const ControlField& field, double omega_x,
                                              double omega_z, const GateTarget& target) {
    field.validate();
    const int n = field.size();
    Eigen::MatrixXd hess(n, n);
    ControlField probe = field;
    for (int k = 0; k < n; ++k) {
        const double delta = 1e-4 * std::max(1.0, std::abs(field.values(k)));
        probe.values(k) = field.values(k) + delta;
        const Eigen::VectorXd gp = fidelity_gradient(probe, omega_x, omega_z, target);
        probe.values(k) = field.values(k) - delta;
        const Eigen::VectorXd gm = fidelity_gradient(probe, omega_x, omega_z, target);
        probe.values(k) = field.values(k);
        hess.col(k) = (gp - gm) / (2.0 * delta);
    }
    return 0.5 * (hess + hess.transpose());
}

/// M x M Hessian of the n-level fidelity in the fine-grid noise vector, by
/// central finite differences of the analytic gradient. Only the perturbed
/// step's exponential is recomputed per column; the rest are cached.
inline Eigen::MatrixXd noise_hessian(const Eigen::VectorXd& c, const Eigen::VectorXd& w_bar,
                                     const NLevelModel& model, double horizon,
                                     const ComplexMatrix& target) {
    if (c.size() != w_bar.size())
        throw std::invalid_argument("noise_hessian: control and noise vectors differ in length");
    model.validate();
    const int m_count = static_cast<int>(c.size());
    const double h = horizon / m_count;

    const auto run = [&](auto hc, auto hw, auto w2) {
        using Mat = decltype(hc);
        std::vector<Mat> steps, dsteps;
        detail::noise_steps<Mat>(c, w_bar, hc, hw, h, steps, dsteps);
        Eigen::MatrixXd hess(m_count, m_count);
        for (int k = 0; k < m_count; ++k) {
            const double delta = 1e-4 * std::max(1.0, std::abs(w_bar(k)));
            const Mat saved_u = steps[k];
            const Mat saved_du = dsteps[k];
            Eigen::VectorXd gp, gm;
            for (int sign = 0; sign < 2; ++sign) {
                const double wk = w_bar(k) + (sign == 0 ? delta : -delta);
                const Mat gen = c(k) * hc + wk * hw;
                if constexpr (std::is_same_v<Mat, Matrix2c>) {
                    auto [u, du] = expm_frechet2(gen, hw, h);
                    steps[k] = u;
                    dsteps[k] = du;
                } else {
                    auto [u, du] = expm_frechet(gen, hw, h);
                    steps[k] = u;
                    dsteps[k] = du;
                }
                Eigen::VectorXd g = detail::product_gradient<Mat>(steps, dsteps, w2);
                (sign == 0 ? gp : gm) = std::move(g);
            }
            steps[k] = saved_u;
            dsteps[k] = saved_du;
            hess.col(k) = (gp - gm) / (2.0 * delta);
        }
        return Eigen::MatrixXd(0.5 * (hess + hess.transpose()));
    };

    if (model.dim() == 2) {
        const Matrix2c hc = model.control_op;
        const Matrix2c hw = model.noise_op;
        const Matrix2c w2 = target;
        return run(hc, hw, w2);
    }
    return run(ComplexMatrix(model.control_op), ComplexMatrix(model.noise_op),
               ComplexMatrix(target));
}

/// Hessian of the qubit fidelity over the M-point noise vector around the
/// constant path w = omega_z_bar, with c = theta replicated onto the fine
/// grid. This is -R_ww of the weak-noise machinery (up to sign).
inline Eigen::MatrixXd fidelity_hessian_noise(const ControlField& field, double omega_x,
                                              double omega_z_bar, int fine_count,
                                              const GateTarget& target) {
    field.validate();
    if (fine_count < field.size() || fine_count % field.size() != 0)
        throw std::invalid_argument("fidelity_hessian_noise: M must be a positive multiple of N");
    const Eigen::VectorXd c = sample_field(field, ShapeGenerator::ideal(), fine_count);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(fine_count, omega_z_bar);
    const NLevelModel model = NLevelModel::qubit_xz(omega_x);
    return noise_hessian(c, w, model, field.horizon, ComplexMatrix(target.matrix));
}

}  // namespace robustgate
