#pragma once

#include "robustgate/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace robustgate {

/// One uncertainty-parameter sample (omega_x, omega_z).
struct OmegaPoint {
    double omega_x = 0.0;
    double omega_z = 0.0;
};

/// Axis-aligned deterministic uncertainty box
/// {|omega_x - cx| <= wx, |omega_z - cz| <= wz}.
struct BoxUncertainty {
    double center_x = 1.0;
    double center_z = 2.0;
    double half_width_x = 0.0;
    double half_width_z = 0.0;

    void validate() const {
        if (half_width_x < 0.0 || half_width_z < 0.0)
            throw std::invalid_argument("BoxUncertainty: half widths must be >= 0");
    }
};

/// Deterministic set-membership model ||Omega^-1 (omega - center)||_p <= 1
/// with p in {2, inf}. Provided for completeness; the default experiments
/// exercise boxes only.
struct EllipsoidUncertainty {
    Eigen::Vector2d center{1.0, 2.0};
    Eigen::Matrix2d weight = Eigen::Matrix2d::Identity();
    int norm_order = 2;  // 2 or 0 for inf

    void validate() const {
        const Eigen::Vector2cd ev = weight.eigenvalues();
        if (ev(0).real() <= 0.0 || ev(1).real() <= 0.0 ||
            std::abs(ev(0).imag()) > 1e-12 || std::abs(ev(1).imag()) > 1e-12)
            throw std::invalid_argument("EllipsoidUncertainty: weight must be positive definite");
        if (norm_order != 2 && norm_order != 0)
            throw std::invalid_argument("EllipsoidUncertainty: norm order must be 2 or inf(0)");
    }
};

/// Probabilistic model: omega ~ N(mean, covariance).
struct ProbabilisticUncertainty {
    Eigen::Vector2d mean{1.0, 2.0};
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();

    void validate() const {
        if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("ProbabilisticUncertainty: covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(covariance);
        if (es.eigenvalues().minCoeff() < -1e-12)
            throw std::invalid_argument("ProbabilisticUncertainty: covariance must be PSD");
    }
};

/// Stationary filtered-noise description of omega_z(t): Gaussian white noise
/// of intensity sigma^2 through a first-order low-pass with time constant
/// tau, discretized on M uniform steps of the horizon.
struct NoiseModel {
    double omega_z_bar = 2.0;
    double sigma = 0.0;
    double tau = 1.0;
    int fine_count = 80;  // M
    double horizon = 2.0;  // T

    double step() const { return horizon / static_cast<double>(fine_count); }
    double alpha() const { return std::exp(-step() / tau); }
    double sigma_tilde_sq() const { return sigma * sigma / step(); }

    void validate() const {
        if (sigma < 0.0) throw std::invalid_argument("NoiseModel: sigma must be >= 0");
        if (!(tau > 0.0)) throw std::invalid_argument("NoiseModel: tau must be > 0");
        if (fine_count < 1) throw std::invalid_argument("NoiseModel: M must be >= 1");
        if (!(horizon > 0.0)) throw std::invalid_argument("NoiseModel: horizon must be > 0");
    }
};

/// Uniform grid over the box, inclusive of endpoints, row-major over
/// (omega_x, omega_z). A count of 1 on an axis yields the center.
inline std::vector<OmegaPoint> sample_grid(const BoxUncertainty& box, int count_x, int count_z) {
    box.validate();
    if (count_x < 1 || count_z < 1)
        throw std::invalid_argument("sample_grid: counts must be >= 1");
    const auto axis = [](double center, double half, int count) {
        std::vector<double> v(count);
        if (count == 1) {
            v[0] = center;
        } else {
            for (int i = 0; i < count; ++i)
                v[i] = center - half + 2.0 * half * static_cast<double>(i) / (count - 1);
        }
        return v;
    };
    const auto xs = axis(box.center_x, box.half_width_x, count_x);
    const auto zs = axis(box.center_z, box.half_width_z, count_z);
    std::vector<OmegaPoint> pts;
    pts.reserve(static_cast<std::size_t>(count_x) * count_z);
    for (double x : xs)
        for (double z : zs) pts.push_back({x, z});
    return pts;
}

/// Deterministic sampling of the ellipsoid set: the center plus uniform
/// angular rings (p = 2) or a uniform grid in the unit box (p = inf),
/// mapped through the weight matrix.
inline std::vector<OmegaPoint> sample_ellipsoid(const EllipsoidUncertainty& ell, int n_rings,
                                                int n_angles) {
    ell.validate();
    if (n_rings < 1 || n_angles < 1)
        throw std::invalid_argument("sample_ellipsoid: counts must be >= 1");
    std::vector<OmegaPoint> pts;
    pts.push_back({ell.center(0), ell.center(1)});
    if (ell.norm_order == 2) {
        for (int r = 1; r <= n_rings; ++r) {
            const double radius = static_cast<double>(r) / n_rings;
            for (int a = 0; a < n_angles; ++a) {
                const double phi = 2.0 * M_PI * a / n_angles;
                const Eigen::Vector2d u{radius * std::cos(phi), radius * std::sin(phi)};
                const Eigen::Vector2d w = ell.center + ell.weight * u;
                pts.push_back({w(0), w(1)});
            }
        }
    } else {
        for (int i = 0; i <= n_rings; ++i) {
            for (int j = 0; j <= n_angles; ++j) {
                const Eigen::Vector2d u{-1.0 + 2.0 * i / n_rings, -1.0 + 2.0 * j / n_angles};
                const Eigen::Vector2d w = ell.center + ell.weight * u;
                pts.push_back({w(0), w(1)});
            }
        }
    }
    return pts;
}

/// L i.i.d. Gaussian draws, deterministic for a given seed.
inline std::vector<OmegaPoint> sample_gaussian(const ProbabilisticUncertainty& prob, int count,
                                               std::uint64_t seed) {
    prob.validate();
    if (count < 1) throw std::invalid_argument("sample_gaussian: count must be >= 1");
    // PSD square root via eigendecomposition (LLT would reject semidefinite C)
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(prob.covariance);
    Eigen::Vector2d lam = es.eigenvalues().cwiseMax(0.0);
    const Eigen::Matrix2d root =
        es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    Rng rng(seed);
    std::vector<OmegaPoint> pts;
    pts.reserve(count);
    for (int l = 0; l < count; ++l) {
        const Eigen::Vector2d g{rng.gaussian(), rng.gaussian()};
        const Eigen::Vector2d w = prob.mean + root * g;
        pts.push_back({w(0), w(1)});
    }
    return pts;
}

/// Covariance of the discretized filtered noise:
/// C_{mm'} = sigma~^2 (1-alpha)/(1+alpha) alpha^{|m-m'|}.
inline Eigen::MatrixXd noise_covariance(const NoiseModel& model) {
    model.validate();
    const int m_count = model.fine_count;
    const double alpha = model.alpha();
    const double scale = model.sigma_tilde_sq() * (1.0 - alpha) / (1.0 + alpha);
    Eigen::MatrixXd cov(m_count, m_count);
    for (int i = 0; i < m_count; ++i)
        for (int j = 0; j < m_count; ++j) cov(i, j) = scale * std::pow(alpha, std::abs(i - j));
    return cov;
}

/// One realization of the discretized noise process: a stationary AR(1)
/// path around omega_z_bar whose covariance matches noise_covariance
/// exactly. From stationarity, the innovation variance is
/// v (1 - alpha^2) with v the stationary marginal variance, which for this
/// covariance collapses to (sigma~ (1-alpha))^2.
inline Eigen::VectorXd sample_noise_path(const NoiseModel& model, std::uint64_t seed) {
    model.validate();
    const int m_count = model.fine_count;
    const double alpha = model.alpha();
    const double marginal_sd =
        std::sqrt(model.sigma_tilde_sq() * (1.0 - alpha) / (1.0 + alpha));
    const double innovation_sd = std::sqrt(model.sigma_tilde_sq()) * (1.0 - alpha);
    Rng rng(seed);
    Eigen::VectorXd path(m_count);
    double w = marginal_sd * rng.gaussian();
    path(0) = model.omega_z_bar + w;
    for (int m = 1; m < m_count; ++m) {
        w = alpha * w + innovation_sd * rng.gaussian();
        path(m) = model.omega_z_bar + w;
    }
    return path;
}

}  // namespace robustgate
