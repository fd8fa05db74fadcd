#pragma once

#include "robustgate/dynamics.hpp"
#include "robustgate/scp.hpp"
#include "robustgate/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace robustgate {

/// Field fluence, the energy measure ||theta||_2^2 h.
inline double fluence(const ControlField& field) {
    field.validate();
    return field.values.squaredNorm() * field.step();
}

/// Field area, the strength measure ||theta||_1 h.
inline double area(const ControlField& field) {
    field.validate();
    return field.values.lpNorm<1>() * field.step();
}

/// Fluence of a shape-generated field, theta^T B theta with
/// B = integral of s(t) s(t)^T dt.
inline double fluence(const ControlField& field, const ShapeGenerator& gen) {
    field.validate();
    const Eigen::MatrixXd b = shape_fluence_matrix(field.size(), field.horizon, gen);
    return field.values.dot(b * field.values);
}

/// Distances below this floor are clipped before taking log10.
inline constexpr double kDistanceFloor = 1e-16;

inline double log10_distance(double d) { return std::log10(std::max(d, kDistanceFloor)); }

/// Worst-case / average metrics of a field over an evaluation grid.
struct FidelityReport {
    double worst_fidelity = 0.0;
    double avg_fidelity = 0.0;
    double log10_worst_distance = 0.0;
    double log10_avg_distance = 0.0;
    double fluence = 0.0;
    double max_field = 0.0;
    int grid_x = 0;
    int grid_z = 0;
    OmegaPoint argmin;
};

/// Evaluates the fidelity at every grid point of the box; worst case is the
/// minimum, average the unweighted mean.
inline FidelityReport grid_metrics(const ControlField& field, const GateTarget& target,
                                   const BoxUncertainty& box, int count_x, int count_z) {
    field.validate();
    if (count_x < 2 || count_z < 2)
        throw std::invalid_argument("grid_metrics: need at least a 2x2 evaluation grid");
    const auto pts = sample_grid(box, count_x, count_z);
    double worst = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    OmegaPoint argmin = pts.front();
    for (const auto& p : pts) {
        const double f = qubit_fidelity(field, p.omega_x, p.omega_z, target);
        sum += f;
        if (f < worst) {
            worst = f;
            argmin = p;
        }
    }
    FidelityReport rep;
    rep.worst_fidelity = worst;
    rep.avg_fidelity = sum / static_cast<double>(pts.size());
    rep.log10_worst_distance = log10_distance(1.0 - worst);
    rep.log10_avg_distance = log10_distance(1.0 - rep.avg_fidelity);
    rep.fluence = fluence(field);
    rep.max_field = field.values.maxCoeff();
    rep.grid_x = count_x;
    rep.grid_z = count_z;
    rep.argmin = argmin;
    return rep;
}

/// Dense log10-distance map over the box for heatmap emission.
/// Entry (i, j) corresponds to the i-th omega_x and j-th omega_z grid value.
inline Eigen::MatrixXd heatmap_grid(const ControlField& field, const GateTarget& target,
                                    const BoxUncertainty& box, int res_x, int res_z) {
    field.validate();
    if (res_x < 2 || res_z < 2)
        throw std::invalid_argument("heatmap_grid: resolution must be >= 2 per axis");
    const auto pts = sample_grid(box, res_x, res_z);  // row-major over (x, z)
    Eigen::MatrixXd map(res_x, res_z);
    for (int i = 0; i < res_x; ++i)
        for (int j = 0; j < res_z; ++j) {
            const auto& p = pts[static_cast<std::size_t>(i) * res_z + j];
            map(i, j) = log10_distance(1.0 - qubit_fidelity(field, p.omega_x, p.omega_z, target));
        }
    return map;
}

/// Second-order lower bound on the fidelity under a control-amplitude
/// perturbation |omega~_x| <= eps:
///   F(theta, wx, wz) - eps |theta . grad F| - eps^2/2 |theta . H theta|,
/// with the gradient exact and the Hessian finite-differenced from it.
inline double taylor_lower_bound(const ControlField& field, double omega_x_bar, double eps,
                                 double omega_z, const GateTarget& target) {
    field.validate();
    if (eps < 0.0) throw std::invalid_argument("taylor_lower_bound: eps must be >= 0");
    const double f = qubit_fidelity(field, omega_x_bar, omega_z, target);
    if (eps == 0.0) return f;
    const Eigen::VectorXd grad = fidelity_gradient(field, omega_x_bar, omega_z, target);
    const Eigen::MatrixXd hess = fidelity_hessian_theta(field, omega_x_bar, omega_z, target);
    const double first = std::abs(field.values.dot(grad));
    const double second = std::abs(field.values.dot(hess * field.values));
    return f - eps * first - 0.5 * eps * eps * second;
}

/// Monte Carlo estimate of the noise-averaged distance.
struct McAverage {
    double avg_distance = 0.0;
    double std_error = 0.0;
    int paths = 0;
};

/// Samples L noise realizations (seeds split per path), propagates each on
/// the fine grid with the command vector replicated, and averages the
/// fidelity. Returns the distance and its standard error.
inline McAverage mc_average_fidelity(const ControlField& field, const NoiseModel& model,
                                     const GateTarget& target, int num_paths, std::uint64_t seed,
                                     double omega_x = 1.0) {
    field.validate();
    model.validate();
    if (num_paths < 2) throw std::invalid_argument("mc_average_fidelity: need >= 2 paths");
    if (model.fine_count % field.size() != 0)
        throw std::invalid_argument(
            "mc_average_fidelity: fine grid must be a multiple of the command grid");
    if (model.horizon != field.horizon)
        throw std::invalid_argument("mc_average_fidelity: model and field horizons differ");

    const Eigen::VectorXd c = sample_field(field, ShapeGenerator::ideal(), model.fine_count);
    const NLevelModel sys = NLevelModel::qubit_xz(omega_x);
    const Matrix2c w_adj = target.matrix.adjoint();

    double mean = 0.0, m2 = 0.0;
    for (int l = 0; l < num_paths; ++l) {
        const Eigen::VectorXd path = sample_noise_path(model, split_seed(seed, l));
        const ComplexMatrix u = propagate_nlevel(c, path, sys, field.horizon);
        const double f = 0.25 * std::norm((w_adj * u).trace());
        // Welford running moments
        const double delta = f - mean;
        mean += delta / (l + 1);
        m2 += delta * (f - mean);
    }
    McAverage out;
    out.paths = num_paths;
    out.avg_distance = 1.0 - mean;
    const double var = m2 / (num_paths - 1);
    out.std_error = std::sqrt(std::max(var, 0.0) / num_paths);
    return out;
}

/// Weak-noise approximation of the noise-averaged distance for a general
/// covariance and n-level model: D = 1 - F(theta, w_bar) + Tr(C R_ww)/2
/// with R_ww the negative fidelity Hessian over the noise vector.
inline double wna_average_fidelity(const Eigen::VectorXd& c, const Eigen::VectorXd& w_bar,
                                   const Eigen::MatrixXd& covariance, const NLevelModel& model,
                                   double horizon, const ComplexMatrix& target) {
    if (covariance.rows() != c.size() || covariance.cols() != c.size())
        throw std::invalid_argument("wna_average_fidelity: covariance dimension mismatch");
    const double f_nominal = fidelity(target, propagate_nlevel(c, w_bar, model, horizon));
    const Eigen::MatrixXd r_ww = -noise_hessian(c, w_bar, model, horizon, target);
    const double correction = 0.5 * (covariance.cwiseProduct(r_ww)).sum();
    return (1.0 - f_nominal) + correction;
}

/// Weak-noise approximation for the filtered-noise model of the qubit.
inline double wna_average_fidelity(const ControlField& field, const NoiseModel& model,
                                   const GateTarget& target, double omega_x = 1.0) {
    field.validate();
    model.validate();
    if (model.fine_count % field.size() != 0)
        throw std::invalid_argument(
            "wna_average_fidelity: fine grid must be a multiple of the command grid");
    if (model.horizon != field.horizon)
        throw std::invalid_argument("wna_average_fidelity: model and field horizons differ");
    const Eigen::VectorXd c = sample_field(field, ShapeGenerator::ideal(), model.fine_count);
    const Eigen::VectorXd w_bar = Eigen::VectorXd::Constant(model.fine_count, model.omega_z_bar);
    return wna_average_fidelity(c, w_bar, noise_covariance(model), NLevelModel::qubit_xz(omega_x),
                                field.horizon, ComplexMatrix(target.matrix));
}

/// One stage of the fluence-fidelity tradeoff.
struct TradeoffPoint {
    double gamma = 0.0;  // +inf on the unconstrained first stage
    double fluence = 0.0;
    double worst_fidelity = 0.0;
    double log10_worst_distance = 0.0;
    ControlField field;
};

struct TradeoffConfig {
    ScpConfig scp;
    int sample_count_x = 5;
    int sample_count_z = 5;
    int eval_count_x = 21;
    int eval_count_z = 21;
    double nominal_target = 0.999;
    int nominal_max_iterations = 20000;
    double fluence_factor = 0.95;
    double stop_worst_fidelity = 0.9;
    int max_stages = 100;
    std::uint64_t seed = 1;
    std::optional<ControlField> initial_field;  // skips the nominal bootstrap
};

/// Sweeps the fluence bound downward: the first stage solves the
/// unconstrained robust problem, then each stage caps the fluence at
/// `fluence_factor` of the previous stage's achieved fluence, warm-starting
/// from the previous field rescaled onto the new bound. Stops once the
/// evaluation-grid worst-case fidelity falls below `stop_worst_fidelity`
/// (that terminal stage is included in the returned series).
inline std::vector<TradeoffPoint> fluence_tradeoff_sweep(const GateTarget& target, double horizon,
                                                         int n, const BoxUncertainty& box,
                                                         const TradeoffConfig& cfg) {
    box.validate();
    const auto samples = sample_grid(box, cfg.sample_count_x, cfg.sample_count_z);

    ControlField start = cfg.initial_field.value_or(ControlField{});
    if (!cfg.initial_field) {
        const ControlField init = random_initial_field(n, horizon, cfg.seed);
        start = nominal_optimize(target, box.center_x, box.center_z, init, cfg.nominal_target,
                                 cfg.nominal_max_iterations, cfg.seed)
                    .field;
    }

    std::vector<TradeoffPoint> points;
    ConstraintSet constraints;  // first stage: gamma = inf
    double gamma = std::numeric_limits<double>::infinity();
    ControlField warm = std::move(start);

    for (int stage = 0; stage < cfg.max_stages; ++stage) {
        const ScpState state = scp_optimize(warm, target, constraints, samples, cfg.scp);
        const FidelityReport rep =
            grid_metrics(state.field, target, box, cfg.eval_count_x, cfg.eval_count_z);

        TradeoffPoint pt;
        pt.gamma = gamma;
        pt.fluence = rep.fluence;
        pt.worst_fidelity = rep.worst_fidelity;
        pt.log10_worst_distance = rep.log10_worst_distance;
        pt.field = state.field;
        points.push_back(pt);

        if (rep.worst_fidelity < cfg.stop_worst_fidelity) break;
        if (!(rep.fluence > 0.0)) break;

        gamma = cfg.fluence_factor * rep.fluence;
        warm = state.field;
        warm.values *= std::sqrt(gamma / rep.fluence);
        constraints.fluence_bound = gamma;
    }
    return points;
}

}  // namespace robustgate
