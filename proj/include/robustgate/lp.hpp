#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace robustgate {

/// Dense linear program in the form
///   maximize    objective . x
///   subject to  ineq_matrix x <= ineq_rhs
///               eq_matrix   x == eq_rhs
///               lower <= x <= upper   (entries may be +-inf)
struct LinearProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd ineq_matrix;
    Eigen::VectorXd ineq_rhs;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int num_vars() const { return static_cast<int>(objective.size()); }

    void validate() const {
        const auto n = objective.size();
        if (n < 1) throw std::invalid_argument("LinearProgram: no variables");
        if (lower.size() != n || upper.size() != n)
            throw std::invalid_argument("LinearProgram: bound vectors must match variable count");
        if (ineq_matrix.size() > 0 && ineq_matrix.cols() != n)
            throw std::invalid_argument("LinearProgram: inequality column mismatch");
        if (ineq_matrix.rows() != ineq_rhs.size())
            throw std::invalid_argument("LinearProgram: inequality row mismatch");
        if (eq_matrix.size() > 0 && eq_matrix.cols() != n)
            throw std::invalid_argument("LinearProgram: equality column mismatch");
        if (eq_matrix.rows() != eq_rhs.size())
            throw std::invalid_argument("LinearProgram: equality row mismatch");
        for (Eigen::Index j = 0; j < n; ++j)
            if (lower(j) > upper(j))
                throw std::invalid_argument("LinearProgram: lower bound above upper bound");
        if (!objective.allFinite())
            throw std::invalid_argument("LinearProgram: objective must be finite");
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    int pivots = 0;
};

namespace detail {

/// Bounded-variable primal simplex on a dense tableau, two phases with
/// artificial variables. Anti-cycling by falling back to Bland's rule after
/// a run of degenerate pivots.
class SimplexSolver {
  public:
    explicit SimplexSolver(const LinearProgram& lp) : lp_(lp) {
        n_ = lp.num_vars();
        num_ineq_ = static_cast<int>(lp.ineq_matrix.rows());
        num_rows_ = num_ineq_ + static_cast<int>(lp.eq_matrix.rows());
        num_cols_ = n_ + num_ineq_ + num_rows_;  // structural | slack | artificial
        bland_threshold_ = 2 * (n_ + num_rows_);
    }

    LpSolution solve() {
        LpSolution out;
        if (num_rows_ == 0) return solve_bounds_only();

        build();
        if (!phase_one()) {
            out.status = LpStatus::Infeasible;
            out.pivots = pivots_;
            return out;
        }
        const bool bounded = phase_two();
        out.pivots = pivots_;
        if (!bounded) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        out.status = LpStatus::Optimal;
        out.x = extract();
        out.objective = lp_.objective.dot(out.x);
        return out;
    }

  private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    static constexpr double kCostTol = 1e-9;
    static constexpr double kPivotTol = 1e-11;
    static constexpr double kFeasTol = 1e-9;
    static constexpr double kDegenTol = 1e-12;

    const LinearProgram& lp_;
    int n_ = 0, num_ineq_ = 0, num_rows_ = 0, num_cols_ = 0;
    Eigen::MatrixXd tab_;        // num_rows x num_cols, current B^-1 A
    Eigen::VectorXd zrow_;       // c_B^T tab - c
    Eigen::VectorXd xb_;         // basic variable values
    Eigen::VectorXd val_;        // nonbasic variable values (ignored for basic)
    Eigen::VectorXd lo_, hi_;    // working bounds per column
    std::vector<int> basis_;     // column index per row
    std::vector<int> row_of_;    // row index per column, -1 if nonbasic
    Eigen::VectorXd cost_;       // working objective per column
    int pivots_ = 0;
    int degenerate_run_ = 0;
    int bland_threshold_ = 0;

    /// No rows at all: each variable goes to whichever finite bound the
    /// objective favors; an unbounded favorable direction is unbounded.
    LpSolution solve_bounds_only() {
        LpSolution out;
        out.x.resize(n_);
        for (int j = 0; j < n_; ++j) {
            const double c = lp_.objective(j);
            double v;
            if (c > 0.0)
                v = lp_.upper(j);
            else if (c < 0.0)
                v = lp_.lower(j);
            else
                v = std::isfinite(lp_.lower(j)) ? lp_.lower(j)
                                                : (std::isfinite(lp_.upper(j)) ? lp_.upper(j) : 0.0);
            if (!std::isfinite(v)) {
                out.status = LpStatus::Unbounded;
                return out;
            }
            out.x(j) = v;
        }
        out.status = LpStatus::Optimal;
        out.objective = lp_.objective.dot(out.x);
        return out;
    }

    void build() {
        tab_.setZero(num_rows_, num_cols_);
        lo_.setZero(num_cols_);
        hi_.setZero(num_cols_);
        val_.setZero(num_cols_);
        cost_.setZero(num_cols_);
        basis_.assign(num_rows_, -1);
        row_of_.assign(num_cols_, -1);

        for (int j = 0; j < n_; ++j) {
            lo_(j) = lp_.lower(j);
            hi_(j) = lp_.upper(j);
            if (std::isfinite(lo_(j)))
                val_(j) = lo_(j);
            else if (std::isfinite(hi_(j)))
                val_(j) = hi_(j);
            else
                val_(j) = 0.0;  // free variable rests at zero
        }
        for (int i = 0; i < num_ineq_; ++i) {
            const int j = n_ + i;
            lo_(j) = 0.0;
            hi_(j) = kInf;
            val_(j) = 0.0;
        }

        Eigen::VectorXd rhs(num_rows_);
        for (int i = 0; i < num_ineq_; ++i) {
            tab_.row(i).head(n_) = lp_.ineq_matrix.row(i);
            tab_(i, n_ + i) = 1.0;
            rhs(i) = lp_.ineq_rhs(i);
        }
        for (int i = num_ineq_; i < num_rows_; ++i) {
            tab_.row(i).head(n_) = lp_.eq_matrix.row(i - num_ineq_);
            rhs(i) = lp_.eq_rhs(i - num_ineq_);
        }

        // Residual at the initial nonbasic point decides each artificial's sign.
        xb_.resize(num_rows_);
        for (int i = 0; i < num_rows_; ++i) {
            double r = rhs(i);
            for (int j = 0; j < n_ + num_ineq_; ++j) r -= tab_(i, j) * val_(j);
            const int a = n_ + num_ineq_ + i;
            const double sign = (r >= 0.0) ? 1.0 : -1.0;
            tab_(i, a) = sign;
            lo_(a) = 0.0;
            hi_(a) = kInf;
            basis_[i] = a;
            row_of_[a] = i;
            if (sign < 0.0) tab_.row(i) *= -1.0;
            xb_(i) = std::abs(r);
        }
    }

    bool is_artificial(int j) const { return j >= n_ + num_ineq_; }

    void recompute_zrow() {
        zrow_ = -cost_;
        for (int i = 0; i < num_rows_; ++i)
            if (cost_(basis_[i]) != 0.0) zrow_ += cost_(basis_[i]) * tab_.row(i).transpose();
    }

    double phase_objective() const {
        double s = 0.0;
        for (int i = 0; i < num_rows_; ++i) s += cost_(basis_[i]) * xb_(i);
        return s;
    }

    bool phase_one() {
        cost_.setZero();
        for (int j = n_ + num_ineq_; j < num_cols_; ++j) cost_(j) = -1.0;
        recompute_zrow();
        if (!iterate()) throw std::runtime_error("solve_lp: phase 1 reported unbounded");
        if (-phase_objective() > kFeasTol * std::max(1.0, xb_.cwiseAbs().maxCoeff()))
            return false;

        // Drive leftover artificials out of the basis where possible, then
        // pin all of them to zero.
        for (int i = 0; i < num_rows_; ++i) {
            if (!is_artificial(basis_[i])) continue;
            int enter = -1;
            for (int j = 0; j < n_ + num_ineq_; ++j) {
                if (row_of_[j] >= 0) continue;
                if (std::abs(tab_(i, j)) > 1e-7) {
                    enter = j;
                    break;
                }
            }
            if (enter >= 0) pivot(i, enter, val_(enter));
            // else: redundant row; artificial stays basic at zero
        }
        for (int j = n_ + num_ineq_; j < num_cols_; ++j) {
            lo_(j) = 0.0;
            hi_(j) = 0.0;
            if (row_of_[j] < 0) val_(j) = 0.0;
        }
        return true;
    }

    bool phase_two() {
        cost_.setZero();
        cost_.head(n_) = lp_.objective;
        recompute_zrow();
        degenerate_run_ = 0;
        return iterate();
    }

    /// Runs pivots until optimal (true) or unbounded (false).
    bool iterate() {
        const long max_pivots = 2000 + 200L * (num_rows_ + num_cols_);
        for (long guard = 0; guard < max_pivots; ++guard) {
            const bool bland = degenerate_run_ > bland_threshold_;
            int enter = -1, dir = 0;
            double best = kCostTol;
            for (int j = 0; j < num_cols_; ++j) {
                if (row_of_[j] >= 0) continue;
                if (lo_(j) == hi_(j) && std::isfinite(lo_(j))) continue;  // pinned
                const double z = zrow_(j);
                int d = 0;
                double score = 0.0;
                const bool at_lower = std::isfinite(lo_(j)) && val_(j) <= lo_(j) + 1e-13 * (1.0 + std::abs(lo_(j)));
                const bool at_upper = std::isfinite(hi_(j)) && val_(j) >= hi_(j) - 1e-13 * (1.0 + std::abs(hi_(j)));
                if (!at_lower && !at_upper) {  // free at rest
                    if (z < -kCostTol) { d = +1; score = -z; }
                    else if (z > kCostTol) { d = -1; score = z; }
                } else {
                    if (at_lower && z < -kCostTol) { d = +1; score = -z; }
                    if (at_upper && z > kCostTol && score < z) { d = -1; score = z; }
                }
                if (d == 0) continue;
                if (bland) { enter = j; dir = d; break; }
                if (score > best) { best = score; enter = j; dir = d; }
            }
            if (enter < 0) return true;  // optimal

            // Ratio test: entering moves by delta >= 0 in direction dir.
            double delta = kInf;
            int leave_row = -1;
            double leave_to = 0.0;  // bound value the leaving variable lands on
            double best_piv = 0.0;
            for (int i = 0; i < num_rows_; ++i) {
                const double t = dir * tab_(i, enter);
                const int bj = basis_[i];
                double limit = kInf, land = 0.0;
                if (t > kPivotTol) {
                    if (std::isfinite(lo_(bj))) {
                        limit = (xb_(i) - lo_(bj)) / t;
                        land = lo_(bj);
                    }
                } else if (t < -kPivotTol) {
                    if (std::isfinite(hi_(bj))) {
                        limit = (hi_(bj) - xb_(i)) / (-t);
                        land = hi_(bj);
                    }
                } else {
                    continue;
                }
                if (limit < -1e-11) limit = 0.0;
                const bool better =
                    (limit < delta - 1e-12) ||
                    (limit < delta + 1e-12 &&
                     (bland ? (leave_row < 0 || basis_[i] < basis_[leave_row])
                            : std::abs(tab_(i, enter)) > best_piv));
                if (better) {
                    delta = std::max(limit, 0.0);
                    leave_row = i;
                    leave_to = land;
                    best_piv = std::abs(tab_(i, enter));
                }
            }
            const double span =
                (std::isfinite(lo_(enter)) && std::isfinite(hi_(enter))) ? hi_(enter) - lo_(enter) : kInf;

            if (span <= delta && std::isfinite(span)) {
                // bound flip, no basis change
                for (int i = 0; i < num_rows_; ++i) xb_(i) -= span * dir * tab_(i, enter);
                val_(enter) = (dir > 0) ? hi_(enter) : lo_(enter);
                degenerate_run_ = (span < kDegenTol) ? degenerate_run_ + 1 : 0;
                continue;
            }
            if (!std::isfinite(delta)) return false;  // unbounded ray

            const double new_val = val_(enter) + dir * delta;
            for (int i = 0; i < num_rows_; ++i) xb_(i) -= delta * dir * tab_(i, enter);
            val_(basis_[leave_row]) = leave_to;
            pivot(leave_row, enter, new_val);
            degenerate_run_ = (delta < kDegenTol) ? degenerate_run_ + 1 : 0;
        }
        throw std::runtime_error("solve_lp: pivot limit exceeded (cycling?)");
    }

    /// Makes `enter` basic in row `row` holding value `value`.
    void pivot(int row, int enter, double value) {
        const double piv = tab_(row, enter);
        if (std::abs(piv) < kPivotTol)
            throw std::runtime_error("solve_lp: numerically singular pivot");
        tab_.row(row) /= piv;
        for (int i = 0; i < num_rows_; ++i) {
            if (i == row) continue;
            const double f = tab_(i, enter);
            if (f != 0.0) tab_.row(i) -= f * tab_.row(row);
        }
        const double zf = zrow_(enter);
        if (zf != 0.0) zrow_ -= zf * tab_.row(row).transpose();

        row_of_[basis_[row]] = -1;
        basis_[row] = enter;
        row_of_[enter] = row;
        xb_(row) = value;
        ++pivots_;
    }

    Eigen::VectorXd extract() const {
        Eigen::VectorXd x(n_);
        for (int j = 0; j < n_; ++j) x(j) = (row_of_[j] >= 0) ? xb_(row_of_[j]) : val_(j);
        return x;
    }
};

}  // namespace detail

/// Solves the LP with a bounded-variable two-phase primal simplex.
/// Infeasibility is reported in the status; an unbounded model (impossible
/// once a trust box is present) is also reported rather than thrown.
inline LpSolution solve_lp(const LinearProgram& lp) {
    lp.validate();
    detail::SimplexSolver solver(lp);
    return solver.solve();
}

}  // namespace robustgate
