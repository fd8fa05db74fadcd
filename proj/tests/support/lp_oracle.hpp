#pragma once

// Brute-force LP oracle: enumerates candidate active sets (rows and bounds),
// solves the square systems, and keeps the best feasible vertex.

#include <robustgate/lp.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace testsupport {

struct LpOracleResult {
    bool feasible = false;
    double objective = -std::numeric_limits<double>::infinity();
};

inline LpOracleResult lp_vertex_oracle(const robustgate::LinearProgram& lp, double tol = 1e-9) {
    const int n = lp.num_vars();
    const int num_eq = static_cast<int>(lp.eq_matrix.rows());

    // Candidate single constraints: inequality rows and finite bounds.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (int i = 0; i < lp.ineq_matrix.rows(); ++i) {
        rows.push_back(lp.ineq_matrix.row(i).transpose());
        rhs.push_back(lp.ineq_rhs(i));
    }
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        if (std::isfinite(lp.upper(j))) {
            e(j) = 1.0;
            rows.push_back(e);
            rhs.push_back(lp.upper(j));
        }
        if (std::isfinite(lp.lower(j))) {
            e = Eigen::VectorXd::Zero(n);
            e(j) = -1.0;
            rows.push_back(e);
            rhs.push_back(-lp.lower(j));
        }
    }

    const int need = n - num_eq;
    if (need < 0) return {};
    const int count = static_cast<int>(rows.size());

    LpOracleResult best;
    std::vector<int> pick(need);

    const auto feasible_at = [&](const Eigen::VectorXd& x) {
        for (int i = 0; i < count; ++i)
            if (rows[static_cast<std::size_t>(i)].dot(x) > rhs[static_cast<std::size_t>(i)] + tol)
                return false;
        for (int i = 0; i < num_eq; ++i)
            if (std::abs(lp.eq_matrix.row(i).dot(x) - lp.eq_rhs(i)) > tol) return false;
        return true;
    };

    const std::function<void(int, int)> recurse = [&](int start, int depth) {
        if (depth == need) {
            Eigen::MatrixXd a(n, n);
            Eigen::VectorXd b(n);
            for (int i = 0; i < num_eq; ++i) {
                a.row(i) = lp.eq_matrix.row(i);
                b(i) = lp.eq_rhs(i);
            }
            for (int i = 0; i < need; ++i) {
                a.row(num_eq + i) = rows[static_cast<std::size_t>(pick[i])].transpose();
                b(num_eq + i) = rhs[static_cast<std::size_t>(pick[i])];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (!lu.isInvertible()) return;
            const Eigen::VectorXd x = lu.solve(b);
            if (!feasible_at(x)) return;
            const double obj = lp.objective.dot(x);
            if (!best.feasible || obj > best.objective) {
                best.feasible = true;
                best.objective = obj;
            }
            return;
        }
        for (int i = start; i < count; ++i) {
            pick[static_cast<std::size_t>(depth)] = i;
            recurse(i + 1, depth + 1);
        }
    };
    if (need <= count) recurse(0, 0);
    return best;
}

}  // namespace testsupport
