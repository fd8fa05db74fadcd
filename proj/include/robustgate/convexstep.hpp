#pragma once

#include "robustgate/lp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace robustgate {

/// Convex feasible set for the command vector, composed from the standard
/// control-constraint primitives. Quadratic balls (fluence, block norms)
/// are handled by cutting planes in solve_subproblem; everything else is
/// linear rows or bounds.
struct ConstraintSet {
    struct Magnitude {
        double min;
        double max;
    };
    struct LinearEq {
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
    };
    struct BlockBall {
        int start = 0;
        int count = 0;
        double radius = 0.0;
    };

    std::optional<Magnitude> magnitude;   // c_min <= theta_k <= c_max
    std::optional<double> slew_rate;      // |theta_{k+1} - theta_k| <= beta h
    std::optional<double> area_bound;     // ||theta||_1 h <= alpha
    std::optional<LinearEq> linear;       // a theta = b
    std::optional<double> fluence_bound;  // ||theta||_2^2 h <= gamma
    std::vector<BlockBall> block_balls;   // ||theta[start..start+count)||_2 <= radius

    bool unconstrained() const {
        return !magnitude && !slew_rate && !area_bound && !linear && !fluence_bound &&
               block_balls.empty();
    }

    void validate(int n) const {
        if (magnitude && magnitude->min > magnitude->max)
            throw std::invalid_argument("ConstraintSet: magnitude bounds inverted");
        if (slew_rate && !(*slew_rate > 0.0))
            throw std::invalid_argument("ConstraintSet: slew bound must be > 0");
        if (area_bound && !(*area_bound > 0.0))
            throw std::invalid_argument("ConstraintSet: area bound must be > 0");
        if (fluence_bound && !(*fluence_bound > 0.0))
            throw std::invalid_argument("ConstraintSet: fluence bound must be > 0");
        if (linear) {
            if (linear->a.cols() != n || linear->a.rows() != linear->b.size())
                throw std::invalid_argument("ConstraintSet: linear equality shape mismatch");
        }
        for (const auto& ball : block_balls) {
            if (ball.start < 0 || ball.count < 1 || ball.start + ball.count > n)
                throw std::invalid_argument("ConstraintSet: block ball range out of bounds");
            if (!(ball.radius > 0.0))
                throw std::invalid_argument("ConstraintSet: block ball radius must be > 0");
        }
    }

    /// Feasibility of a command vector, linear parts to `tol`, balls to `tol`
    /// in squared units.
    bool satisfies(const Eigen::VectorXd& theta, double h, double tol = 1e-8) const {
        const int n = static_cast<int>(theta.size());
        if (magnitude)
            for (int k = 0; k < n; ++k)
                if (theta(k) < magnitude->min - tol || theta(k) > magnitude->max + tol) return false;
        if (slew_rate)
            for (int k = 0; k + 1 < n; ++k)
                if (std::abs(theta(k + 1) - theta(k)) > *slew_rate * h + tol) return false;
        if (area_bound && theta.lpNorm<1>() * h > *area_bound + tol) return false;
        if (linear && (linear->a * theta - linear->b).cwiseAbs().maxCoeff() > tol) return false;
        if (fluence_bound && theta.squaredNorm() * h > *fluence_bound + tol) return false;
        for (const auto& ball : block_balls)
            if (theta.segment(ball.start, ball.count).norm() > ball.radius + tol) return false;
        return true;
    }
};

/// Linear rows and bounds of the trust-region subproblem, in the increment
/// variable. Variables are [theta~ (n) | area auxiliaries (n, if any)];
/// the epigraph variable is appended by solve_subproblem.
struct SubproblemScaffold {
    int n = 0;
    int num_aux = 0;
    Eigen::VectorXd lower, upper;
    Eigen::MatrixXd ineq_a;
    Eigen::VectorXd ineq_b;
    Eigen::MatrixXd eq_a;
    Eigen::VectorXd eq_b;
};

/// Turns the constraint set at the current iterate into LP rows on the
/// increment: box and trust become variable bounds, slew paired rows, the
/// area bound auxiliary split variables, linear equalities shifted rows.
/// Ball constraints are deferred to the cutting-plane loop.
inline SubproblemScaffold assemble_constraints(const Eigen::VectorXd& theta,
                                               const ConstraintSet& set, double trust_radius,
                                               double h) {
    const int n = static_cast<int>(theta.size());
    set.validate(n);
    if (!(trust_radius > 0.0))
        throw std::invalid_argument("assemble_constraints: trust radius must be > 0");

    SubproblemScaffold out;
    out.n = n;
    out.num_aux = set.area_bound ? n : 0;
    const int total = n + out.num_aux;

    out.lower.resize(total);
    out.upper.resize(total);
    for (int k = 0; k < n; ++k) {
        double lo = -trust_radius, hi = trust_radius;
        if (set.magnitude) {
            lo = std::max(lo, set.magnitude->min - theta(k));
            hi = std::min(hi, set.magnitude->max - theta(k));
        }
        out.lower(k) = lo;
        out.upper(k) = hi;
    }
    for (int k = 0; k < out.num_aux; ++k) {
        out.lower(n + k) = 0.0;
        out.upper(n + k) = std::abs(theta(k)) + trust_radius;
    }

    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    const auto add_row = [&](const Eigen::VectorXd& a, double b) {
        rows.push_back(a);
        rhs.push_back(b);
    };

    if (set.slew_rate) {
        const double bound = *set.slew_rate * h;
        for (int k = 0; k + 1 < n; ++k) {
            const double base = theta(k + 1) - theta(k);
            Eigen::VectorXd row = Eigen::VectorXd::Zero(total);
            row(k + 1) = 1.0;
            row(k) = -1.0;
            add_row(row, bound - base);
            add_row(-row, bound + base);
        }
    }
    if (set.area_bound) {
        // |theta_k + theta~_k| <= u_k, sum u_k h <= alpha
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(total);
            row(k) = 1.0;
            row(n + k) = -1.0;
            add_row(row, -theta(k));
            row(k) = -1.0;
            add_row(row, theta(k));
        }
        Eigen::VectorXd row = Eigen::VectorXd::Zero(total);
        row.segment(n, n).setConstant(h);
        add_row(row, *set.area_bound);
    }

    out.ineq_a.resize(static_cast<int>(rows.size()), total);
    out.ineq_b.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.ineq_a.row(static_cast<int>(i)) = rows[i].transpose();
        out.ineq_b(static_cast<int>(i)) = rhs[i];
    }

    if (set.linear) {
        out.eq_a.resize(set.linear->a.rows(), total);
        out.eq_a.setZero();
        out.eq_a.leftCols(n) = set.linear->a;
        out.eq_b = set.linear->b - set.linear->a * theta;
    } else {
        out.eq_a.resize(0, total);
        out.eq_b.resize(0);
    }
    return out;
}

enum class SubproblemStatus { Optimal, Infeasible };

struct SubproblemSolution {
    SubproblemStatus status = SubproblemStatus::Infeasible;
    Eigen::VectorXd increment;        // theta~
    double worst_linearized = 0.0;    // f_0
    int cut_count = 0;
};

/// Trust-region step: maximize the worst sampled linearized fidelity
///   maximize f0  s.t.  f_i + theta~^T g_i >= f0,  theta + theta~ feasible.
///
/// Ball constraints are enforced by Kelley cuts: solve the LP, and while a
/// ball is violated beyond tolerance add the tangent hyperplane at the
/// violating point's radial projection and re-solve.
inline SubproblemSolution solve_subproblem(const Eigen::VectorXd& fidelities,
                                           const Eigen::MatrixXd& gradients,
                                           const Eigen::VectorXd& theta, const ConstraintSet& set,
                                           double trust_radius, double h, int max_cuts = 100) {
    const int n = static_cast<int>(theta.size());
    const int num_samples = static_cast<int>(fidelities.size());
    if (num_samples < 1) throw std::invalid_argument("solve_subproblem: no samples");
    if (gradients.rows() != n || gradients.cols() != num_samples)
        throw std::invalid_argument("solve_subproblem: gradient matrix must be N x L");
    if (!fidelities.allFinite() || !gradients.allFinite())
        throw std::invalid_argument("solve_subproblem: non-finite input");

    SubproblemSolution out;

    // All-zero gradients: any feasible increment is optimal; return zero.
    const double grad_scale = gradients.cwiseAbs().maxCoeff();
    if (grad_scale == 0.0) {
        out.status = SubproblemStatus::Optimal;
        out.increment = Eigen::VectorXd::Zero(n);
        out.worst_linearized = fidelities.minCoeff();
        return out;
    }

    // Scale fidelity data so gradient entries are O(1) before pivoting;
    // near-converged gradients are otherwise ~1e-6 against O(1) rows.
    const double f_shift = fidelities.minCoeff();
    const Eigen::VectorXd f_scaled = (fidelities.array() - f_shift) / grad_scale;
    const Eigen::MatrixXd g_scaled = gradients / grad_scale;

    const SubproblemScaffold scaffold = assemble_constraints(theta, set, trust_radius, h);
    const int base_vars = scaffold.n + scaffold.num_aux;
    const int f0 = base_vars;  // epigraph variable index

    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(base_vars + 1);
    lp.objective(f0) = 1.0;
    lp.lower.resize(base_vars + 1);
    lp.upper.resize(base_vars + 1);
    lp.lower.head(base_vars) = scaffold.lower;
    lp.upper.head(base_vars) = scaffold.upper;
    const double f0_slack = trust_radius * g_scaled.cwiseAbs().colwise().sum().maxCoeff() + 1.0;
    lp.lower(f0) = f_scaled.minCoeff() - f0_slack;
    lp.upper(f0) = f_scaled.maxCoeff() + f0_slack;

    const int fixed_rows = static_cast<int>(scaffold.ineq_a.rows());
    std::vector<Eigen::VectorXd> cut_rows;
    std::vector<double> cut_rhs;

    const auto build_and_solve = [&]() {
        const int rows = fixed_rows + num_samples + static_cast<int>(cut_rows.size());
        lp.ineq_matrix.setZero(rows, base_vars + 1);
        lp.ineq_rhs.resize(rows);
        if (fixed_rows > 0) {
            lp.ineq_matrix.topLeftCorner(fixed_rows, base_vars) = scaffold.ineq_a;
            lp.ineq_rhs.head(fixed_rows) = scaffold.ineq_b;
        }
        for (int i = 0; i < num_samples; ++i) {
            // f0 - theta~^T g_i <= f_i
            lp.ineq_matrix.row(fixed_rows + i).head(n) = -g_scaled.col(i).transpose();
            lp.ineq_matrix(fixed_rows + i, f0) = 1.0;
            lp.ineq_rhs(fixed_rows + i) = f_scaled(i);
        }
        for (std::size_t c = 0; c < cut_rows.size(); ++c) {
            lp.ineq_matrix.row(fixed_rows + num_samples + static_cast<int>(c)).head(n) =
                cut_rows[c].transpose();
            lp.ineq_rhs(fixed_rows + num_samples + static_cast<int>(c)) = cut_rhs[c];
        }
        if (scaffold.eq_a.rows() > 0) {
            lp.eq_matrix.setZero(scaffold.eq_a.rows(), base_vars + 1);
            lp.eq_matrix.leftCols(base_vars) = scaffold.eq_a;
            lp.eq_rhs = scaffold.eq_b;
        } else {
            lp.eq_matrix.resize(0, base_vars + 1);
            lp.eq_rhs.resize(0);
        }
        return solve_lp(lp);
    };

    // Lexicographic refinement: among increments attaining the optimal f0,
    // pick one of minimal L1 norm. The plain LP returns an arbitrary vertex
    // that parks unused coordinates at the trust bounds, which wrecks the
    // nonlinear acceptance test.
    const auto refine_min_l1 = [&](double f0_opt) -> std::optional<Eigen::VectorXd> {
        const int s0 = base_vars;  // split variables s_k >= |theta~_k|
        LinearProgram lp2;
        lp2.objective = Eigen::VectorXd::Zero(base_vars + n);
        lp2.objective.segment(s0, n).setConstant(-1.0);
        lp2.lower.resize(base_vars + n);
        lp2.upper.resize(base_vars + n);
        lp2.lower.head(base_vars) = scaffold.lower;
        lp2.upper.head(base_vars) = scaffold.upper;
        lp2.lower.segment(s0, n).setZero();
        for (int k = 0; k < n; ++k)
            lp2.upper(s0 + k) = std::max(std::abs(scaffold.lower(k)), std::abs(scaffold.upper(k)));

        const int rows = fixed_rows + num_samples + static_cast<int>(cut_rows.size()) + 2 * n;
        lp2.ineq_matrix.setZero(rows, base_vars + n);
        lp2.ineq_rhs.resize(rows);
        if (fixed_rows > 0) {
            lp2.ineq_matrix.topLeftCorner(fixed_rows, base_vars) = scaffold.ineq_a;
            lp2.ineq_rhs.head(fixed_rows) = scaffold.ineq_b;
        }
        const double slack = 1e-9 * std::max(1.0, std::abs(f0_opt));
        for (int i = 0; i < num_samples; ++i) {
            // -theta~^T g_i <= f_i - f0_opt
            lp2.ineq_matrix.row(fixed_rows + i).head(n) = -g_scaled.col(i).transpose();
            lp2.ineq_rhs(fixed_rows + i) = f_scaled(i) - f0_opt + slack;
        }
        int base = fixed_rows + num_samples;
        for (std::size_t c = 0; c < cut_rows.size(); ++c) {
            lp2.ineq_matrix.row(base + static_cast<int>(c)).head(n) = cut_rows[c].transpose();
            lp2.ineq_rhs(base + static_cast<int>(c)) = cut_rhs[c];
        }
        base += static_cast<int>(cut_rows.size());
        for (int k = 0; k < n; ++k) {
            lp2.ineq_matrix(base + 2 * k, k) = 1.0;
            lp2.ineq_matrix(base + 2 * k, s0 + k) = -1.0;
            lp2.ineq_rhs(base + 2 * k) = 0.0;
            lp2.ineq_matrix(base + 2 * k + 1, k) = -1.0;
            lp2.ineq_matrix(base + 2 * k + 1, s0 + k) = -1.0;
            lp2.ineq_rhs(base + 2 * k + 1) = 0.0;
        }
        if (scaffold.eq_a.rows() > 0) {
            lp2.eq_matrix.setZero(scaffold.eq_a.rows(), base_vars + n);
            lp2.eq_matrix.leftCols(base_vars) = scaffold.eq_a;
            lp2.eq_rhs = scaffold.eq_b;
        } else {
            lp2.eq_matrix.resize(0, base_vars + n);
            lp2.eq_rhs.resize(0);
        }
        const LpSolution sol = solve_lp(lp2);
        if (sol.status != LpStatus::Optimal) return std::nullopt;
        return Eigen::VectorXd(sol.x.head(n));
    };

    // Tangent cut for ||v|| <= radius at candidate point v (violating):
    // p = radius v/||v||, p.(v' - p) <= 0  =>  p.theta~' <= radius^2 - p.center
    struct Ball {
        int start;
        int count;
        double radius;
    };
    std::vector<Ball> balls;
    if (set.fluence_bound)
        balls.push_back({0, n, std::sqrt(*set.fluence_bound / h)});
    for (const auto& b : set.block_balls) balls.push_back({b.start, b.count, b.radius});

    for (int round = 0;; ++round) {
        const LpSolution sol = build_and_solve();
        if (sol.status == LpStatus::Infeasible) {
            out.status = SubproblemStatus::Infeasible;
            out.cut_count = static_cast<int>(cut_rows.size());
            return out;
        }
        if (sol.status == LpStatus::Unbounded)
            throw std::logic_error("solve_subproblem: unbounded LP despite trust box");

        Eigen::VectorXd inc = sol.x.head(n);
        if (const auto refined = refine_min_l1(sol.x(f0))) inc = *refined;
        bool violated = false;
        if (round < max_cuts) {
            for (const auto& ball : balls) {
                const Eigen::VectorXd v =
                    theta.segment(ball.start, ball.count) + inc.segment(ball.start, ball.count);
                const double norm = v.norm();
                if (norm - ball.radius > 1e-9) {
                    violated = true;
                    const Eigen::VectorXd p = (ball.radius / norm) * v;
                    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
                    row.segment(ball.start, ball.count) = p;
                    const double rhs = ball.radius * ball.radius -
                                       p.dot(theta.segment(ball.start, ball.count));
                    cut_rows.push_back(row);
                    cut_rhs.push_back(rhs);
                }
            }
        }
        if (!violated) {
            // feasible, or the cut budget is spent; the residual ball
            // violation shrinks monotonically with the budget
            out.status = SubproblemStatus::Optimal;
            out.increment = inc;
            out.worst_linearized = (fidelities + gradients.transpose() * inc).minCoeff();
            out.cut_count = static_cast<int>(cut_rows.size());
            return out;
        }
    }
}

}  // namespace robustgate
