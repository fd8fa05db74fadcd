#pragma once

#include "robustgate/convexstep.hpp"
#include "robustgate/dynamics.hpp"
#include "robustgate/rng.hpp"
#include "robustgate/uncertainty.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustgate {

/// Thrown when the nominal gradient search cannot reach the requested
/// fidelity; carries the best field found so the caller can retry or accept.
class NominalOptimizeError : public std::runtime_error {
  public:
    NominalOptimizeError(std::string msg, ControlField best, double best_fidelity)
        : std::runtime_error(std::move(msg)),
          best_field(std::move(best)),
          best_fidelity(best_fidelity) {}

    ControlField best_field;
    double best_fidelity;
};

struct NominalResult {
    ControlField field;
    double fidelity = 0.0;
    int iterations = 0;
};

/// Seeded default initializer: entries uniform in [-0.5, 0.5]. The zero
/// field is a stationary point for some targets, so a random start is the
/// safe default.
inline ControlField random_initial_field(int n, double horizon, std::uint64_t seed) {
    Rng rng(seed, 0x696e6974ULL);
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v(k) = rng.uniform(-0.5, 0.5);
    return {v, horizon};
}

/// Gradient ascent with backtracking line search (step halved until the
/// fidelity increases, initial step 1.0) until F(theta, omega_bar) reaches
/// target_fidelity. A stationary start (zero gradient) is jittered once
/// with the seeded random recipe before giving up.
inline NominalResult nominal_optimize(const GateTarget& target, double omega_x, double omega_z,
                                      const ControlField& theta_init, double target_fidelity,
                                      int max_iterations, std::uint64_t seed = 1) {
    theta_init.validate();
    if (!(target_fidelity > 0.0 && target_fidelity < 1.0))
        throw std::invalid_argument("nominal_optimize: target fidelity must lie in (0, 1)");
    if (max_iterations < 0) throw std::invalid_argument("nominal_optimize: negative iteration cap");

    ControlField theta = theta_init;
    double f = qubit_fidelity(theta, omega_x, omega_z, target);
    bool jittered = false;

    int iter = 0;
    for (; iter < max_iterations && f < target_fidelity; ++iter) {
        const Eigen::VectorXd grad = fidelity_gradient(theta, omega_x, omega_z, target);
        if (grad.cwiseAbs().maxCoeff() < 1e-12) {
            if (jittered) break;
            jittered = true;
            const ControlField bump =
                random_initial_field(theta.size(), theta.horizon, split_seed(seed, 0x6a6974ULL));
            theta.values += bump.values;
            f = qubit_fidelity(theta, omega_x, omega_z, target);
            continue;
        }
        double step = 1.0;
        bool improved = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            ControlField trial = theta;
            trial.values += step * grad;
            const double ft = qubit_fidelity(trial, omega_x, omega_z, target);
            if (ft > f) {
                theta = std::move(trial);
                f = ft;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;  // line search exhausted: numerically stationary
    }

    if (f < target_fidelity)
        throw NominalOptimizeError("nominal_optimize: reached F = " + std::to_string(f) +
                                       " < target " + std::to_string(target_fidelity),
                                   theta, f);
    return {std::move(theta), f, iter};
}

/// Trust-region schedule and stopping rules of the robust search.
struct ScpConfig {
    double initial_trust = 0.0;  // <= 0: 0.1 * max(1, |theta0|_inf)
    double grow = 1.6;
    double shrink = 0.5;
    double max_trust = 0.0;  // <= 0: 10 * initial
    double min_trust = 1e-7;
    int max_iterations = 300;
    double improvement_tol = 1e-10;
    int stall_limit = 10;  // consecutive accepted improvements below tol

    void validate() const {
        if (!(shrink > 0.0 && shrink < 1.0))
            throw std::invalid_argument("ScpConfig: shrink must lie in (0, 1)");
        if (!(grow > 1.0)) throw std::invalid_argument("ScpConfig: grow must be > 1");
        if (!(min_trust > 0.0)) throw std::invalid_argument("ScpConfig: min trust must be > 0");
        if (max_iterations < 1) throw std::invalid_argument("ScpConfig: need >= 1 iteration");
        if (stall_limit < 1) throw std::invalid_argument("ScpConfig: stall limit must be >= 1");
    }
};

struct ScpIterationRecord {
    int iteration = 0;
    double trust_radius = 0.0;   // radius used for the subproblem
    double worst_fidelity = 0.0; // sampled worst case of the current iterate
    bool accepted = false;
};

enum class ScpStop { TrustRadiusFloor, MaxIterations, Stalled };

inline const char* to_string(ScpStop reason) {
    switch (reason) {
        case ScpStop::TrustRadiusFloor: return "trust_radius_floor";
        case ScpStop::MaxIterations: return "max_iterations";
        case ScpStop::Stalled: return "stalled";
    }
    return "unknown";
}

struct ScpState {
    ControlField field;
    double trust_radius = 0.0;
    double worst_fidelity = 0.0;
    int iterations = 0;
    ScpStop stop_reason = ScpStop::MaxIterations;
    std::vector<ScpIterationRecord> history;
};

/// Robust worst-case search over the sampled uncertainty set.
///
/// Each iteration linearizes the fidelity at every sample, solves the
/// convex trust-region subproblem for the increment, and accepts it only if
/// the sampled worst case strictly improves, growing the trust region on
/// acceptance and shrinking it otherwise.
inline ScpState scp_optimize(const ControlField& theta0, const GateTarget& target,
                             const ConstraintSet& constraints,
                             const std::vector<OmegaPoint>& samples, const ScpConfig& cfg = {}) {
    theta0.validate();
    cfg.validate();
    if (samples.empty()) throw std::invalid_argument("scp_optimize: no uncertainty samples");
    const int n = theta0.size();
    constraints.validate(n);
    const double h = theta0.step();
    if (!constraints.satisfies(theta0.values, h))
        throw std::invalid_argument("scp_optimize: initial field is infeasible");

    const int num_samples = static_cast<int>(samples.size());
    const auto eval_all = [&](const ControlField& th) {
        Eigen::VectorXd f(num_samples);
        for (int i = 0; i < num_samples; ++i)
            f(i) = qubit_fidelity(th, samples[i].omega_x, samples[i].omega_z, target);
        return f;
    };

    ScpState state;
    state.field = theta0;
    double rho = cfg.initial_trust > 0.0
                     ? cfg.initial_trust
                     : 0.1 * std::max(1.0, theta0.values.cwiseAbs().maxCoeff());
    const double rho_max = cfg.max_trust > 0.0 ? cfg.max_trust : 10.0 * rho;
    if (rho > rho_max || cfg.min_trust >= rho)
        throw std::invalid_argument("scp_optimize: trust radii must satisfy min < initial <= max");

    Eigen::VectorXd f = eval_all(state.field);
    double worst = f.minCoeff();
    int stall = 0;
    state.stop_reason = ScpStop::MaxIterations;

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        Eigen::MatrixXd g(n, num_samples);
        for (int i = 0; i < num_samples; ++i)
            g.col(i) = fidelity_gradient(state.field, samples[i].omega_x, samples[i].omega_z, target);

        const SubproblemSolution sub =
            solve_subproblem(f, g, state.field.values, constraints, rho, h);

        bool accepted = false;
        if (sub.status == SubproblemStatus::Optimal) {
            ControlField trial = state.field;
            trial.values += sub.increment;
            const Eigen::VectorXd f_trial = eval_all(trial);
            const double worst_trial = f_trial.minCoeff();
            if (worst_trial > worst) {
                accepted = true;
                state.field = std::move(trial);
                f = f_trial;
                const double gain = worst_trial - worst;
                worst = worst_trial;
                stall = (gain < cfg.improvement_tol) ? stall + 1 : 0;
            }
        }
        state.history.push_back({iter, rho, worst, accepted});
        state.iterations = iter;

        if (accepted) {
            rho = std::min(cfg.grow * rho, rho_max);
            if (stall >= cfg.stall_limit) {
                state.stop_reason = ScpStop::Stalled;
                break;
            }
        } else {
            rho = cfg.shrink * rho;
            if (rho < cfg.min_trust) {
                state.stop_reason = ScpStop::TrustRadiusFloor;
                break;
            }
        }
    }

    state.trust_radius = rho;
    state.worst_fidelity = worst;
    return state;
}

}  // namespace robustgate
