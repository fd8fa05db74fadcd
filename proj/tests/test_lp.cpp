#include <robustgate/lp.hpp>
#include <robustgate/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support/lp_oracle.hpp"

#include <cmath>
#include <limits>

using namespace robustgate;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram make_lp(int n) {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(n);
    lp.ineq_matrix.resize(0, n);
    lp.ineq_rhs.resize(0);
    lp.eq_matrix.resize(0, n);
    lp.eq_rhs.resize(0);
    lp.lower = Eigen::VectorXd::Constant(n, -kInf);
    lp.upper = Eigen::VectorXd::Constant(n, kInf);
    return lp;
}

}  // namespace

TEST_CASE("solve_lp basics") {
    SECTION("maximize x subject to x <= 3, x >= -1") {
        LinearProgram lp = make_lp(1);
        lp.objective(0) = 1.0;
        lp.ineq_matrix.resize(2, 1);
        lp.ineq_matrix << 1.0, -1.0;
        lp.ineq_rhs.resize(2);
        lp.ineq_rhs << 3.0, 1.0;
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        REQUIRE(sol.x(0) == Catch::Approx(3.0).margin(1e-9));
        REQUIRE(sol.objective == Catch::Approx(3.0).margin(1e-9));
    }
    SECTION("contradictory constraints are infeasible") {
        LinearProgram lp = make_lp(1);
        lp.objective(0) = 1.0;
        lp.ineq_matrix.resize(2, 1);
        lp.ineq_matrix << 1.0, -1.0;
        lp.ineq_rhs.resize(2);
        lp.ineq_rhs << 0.0, -1.0;  // x <= 0 and x >= 1
        REQUIRE(solve_lp(lp).status == LpStatus::Infeasible);
    }
    SECTION("unbounded ray is reported") {
        LinearProgram lp = make_lp(1);
        lp.objective(0) = 1.0;
        lp.lower(0) = 0.0;
        lp.ineq_matrix.resize(1, 1);
        lp.ineq_matrix << -1.0;
        lp.ineq_rhs.resize(1);
        lp.ineq_rhs << 0.0;
        REQUIRE(solve_lp(lp).status == LpStatus::Unbounded);
    }
    SECTION("bounds-only model") {
        LinearProgram lp = make_lp(3);
        lp.objective << 1.0, -2.0, 0.0;
        lp.lower << -1.0, -5.0, 2.0;
        lp.upper << 4.0, 5.0, 2.0;
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        REQUIRE(sol.x(0) == Catch::Approx(4.0));
        REQUIRE(sol.x(1) == Catch::Approx(-5.0));
        REQUIRE(sol.x(2) == Catch::Approx(2.0));
    }
    SECTION("equality constraint") {
        LinearProgram lp = make_lp(2);
        lp.objective << 1.0, -1.0;
        lp.eq_matrix.resize(1, 2);
        lp.eq_matrix << 1.0, 1.0;
        lp.eq_rhs.resize(1);
        lp.eq_rhs << 1.0;
        lp.lower << -2.0, -2.0;
        lp.upper << 2.0, 2.0;
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        // best is x = 2, y = -1
        REQUIRE(sol.objective == Catch::Approx(3.0).margin(1e-9));
        REQUIRE(sol.x(0) + sol.x(1) == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("inverted bounds are rejected") {
        LinearProgram lp = make_lp(1);
        lp.lower(0) = 1.0;
        lp.upper(0) = 0.0;
        REQUIRE_THROWS_AS(solve_lp(lp), std::invalid_argument);
    }
}

TEST_CASE("solve_lp matches the vertex-enumeration oracle on random instances") {
    Rng rng(2024);
    int infeasible_seen = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 3.0));       // 2..4 vars
        const int rows = 1 + static_cast<int>(rng.uniform(0.0, 8.0));    // 1..8 rows
        LinearProgram lp = make_lp(n);
        for (int j = 0; j < n; ++j) {
            lp.objective(j) = rng.uniform(-1.0, 1.0);
            lp.lower(j) = -5.0;
            lp.upper(j) = 5.0;
        }
        lp.ineq_matrix.resize(rows, n);
        lp.ineq_rhs.resize(rows);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < n; ++j) lp.ineq_matrix(i, j) = rng.uniform(-1.0, 1.0);
            lp.ineq_rhs(i) = rng.uniform(-0.5, 1.5);
        }

        const LpSolution sol = solve_lp(lp);
        const testsupport::LpOracleResult oracle = testsupport::lp_vertex_oracle(lp);
        if (!oracle.feasible) {
            ++infeasible_seen;
            REQUIRE(sol.status == LpStatus::Infeasible);
            continue;
        }
        REQUIRE(sol.status == LpStatus::Optimal);
        REQUIRE(sol.objective == Catch::Approx(oracle.objective).margin(1e-8));
        // returned point must itself be feasible
        for (int i = 0; i < rows; ++i)
            REQUIRE(lp.ineq_matrix.row(i).dot(sol.x) <= lp.ineq_rhs(i) + 1e-9);
        for (int j = 0; j < n; ++j) {
            REQUIRE(sol.x(j) >= lp.lower(j) - 1e-9);
            REQUIRE(sol.x(j) <= lp.upper(j) + 1e-9);
        }
    }
    // the generator should produce a mix, mostly feasible
    REQUIRE(infeasible_seen < 100);
}

TEST_CASE("solve_lp with equalities matches the oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 3;
        LinearProgram lp = make_lp(n);
        for (int j = 0; j < n; ++j) {
            lp.objective(j) = rng.uniform(-1.0, 1.0);
            lp.lower(j) = -4.0;
            lp.upper(j) = 4.0;
        }
        lp.ineq_matrix.resize(3, n);
        lp.ineq_rhs.resize(3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < n; ++j) lp.ineq_matrix(i, j) = rng.uniform(-1.0, 1.0);
            lp.ineq_rhs(i) = rng.uniform(0.0, 2.0);
        }
        lp.eq_matrix.resize(1, n);
        for (int j = 0; j < n; ++j) lp.eq_matrix(0, j) = rng.uniform(-1.0, 1.0);
        lp.eq_rhs.resize(1);
        lp.eq_rhs << rng.uniform(-1.0, 1.0);

        const LpSolution sol = solve_lp(lp);
        const auto oracle = testsupport::lp_vertex_oracle(lp);
        if (!oracle.feasible) {
            REQUIRE(sol.status == LpStatus::Infeasible);
            continue;
        }
        REQUIRE(sol.status == LpStatus::Optimal);
        REQUIRE(sol.objective == Catch::Approx(oracle.objective).margin(1e-8));
    }
}

TEST_CASE("solve_lp survives degenerate duplicated rows") {
    LinearProgram lp = make_lp(2);
    lp.objective << 1.0, 1.0;
    lp.ineq_matrix.resize(6, 2);
    lp.ineq_rhs.resize(6);
    for (int i = 0; i < 3; ++i) {
        lp.ineq_matrix.row(2 * i) << 1.0, 1.0;
        lp.ineq_rhs(2 * i) = 1.0;
        lp.ineq_matrix.row(2 * i + 1) << 1.0, 0.0;
        lp.ineq_rhs(2 * i + 1) = 1.0;
    }
    lp.lower.setConstant(0.0);
    lp.upper.setConstant(10.0);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(1.0).margin(1e-9));
}
