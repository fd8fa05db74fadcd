#include <robustgate/analysis.hpp>
#include <robustgate/scp.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace robustgate;

namespace {

BoxUncertainty delta_xz() {
    BoxUncertainty box;
    box.center_x = 1.0;
    box.center_z = 2.0;
    box.half_width_x = 0.01;
    box.half_width_z = 0.2;
    return box;
}

}  // namespace

TEST_CASE("nominal_optimize") {
    SECTION("identity gate from the zero field reaches 0.999") {
        ControlField zero{Eigen::VectorXd::Zero(10), 2.0};
        const NominalResult res =
            nominal_optimize(GateTarget::identity(), 1.0, 2.0, zero, 0.999, 5000, 3);
        REQUIRE(res.fidelity >= 0.999);
    }
    SECTION("all three gates reach 0.999 from seeded random fields") {
        for (const auto& g : {GateTarget::identity(), GateTarget::hadamard(), GateTarget::phase()}) {
            const ControlField init = random_initial_field(10, 2.0, 11);
            const NominalResult res = nominal_optimize(g, 1.0, 2.0, init, 0.999, 5000, 11);
            REQUIRE(res.fidelity >= 0.999);
        }
    }
    SECTION("already-optimal input returns unchanged after zero iterations") {
        const ControlField init = random_initial_field(8, 2.0, 13);
        const NominalResult first =
            nominal_optimize(GateTarget::hadamard(), 1.0, 2.0, init, 0.999, 5000, 13);
        const NominalResult again =
            nominal_optimize(GateTarget::hadamard(), 1.0, 2.0, first.field, 0.99, 5000, 13);
        REQUIRE(again.iterations == 0);
        REQUIRE((again.field.values - first.field.values).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("ascent never loses fidelity versus the start") {
        const ControlField init = random_initial_field(6, 1.0, 17);
        const double f0 = qubit_fidelity(init, 1.0, 2.0, GateTarget::phase());
        const NominalResult res =
            nominal_optimize(GateTarget::phase(), 1.0, 2.0, init, 0.999, 4000, 17);
        REQUIRE(res.fidelity >= f0);
    }
    SECTION("failure carries the best field found") {
        ControlField zero{Eigen::VectorXd::Zero(4), 1.0};
        try {
            nominal_optimize(GateTarget::hadamard(), 1.0, 2.0, zero, 0.9999999, 3, 19);
            FAIL("expected NominalOptimizeError");
        } catch (const NominalOptimizeError& e) {
            REQUIRE(e.best_fidelity >= 0.0);
            REQUIRE(e.best_field.size() == 4);
        }
    }
}

TEST_CASE("scp_optimize") {
    const GateTarget identity = GateTarget::identity();

    SECTION("degenerate single-sample set never decreases nominal fidelity") {
        const ControlField init = random_initial_field(8, 2.0, 23);
        const NominalResult nom = nominal_optimize(identity, 1.0, 2.0, init, 0.999, 5000, 23);
        const std::vector<OmegaPoint> center{{1.0, 2.0}};
        const ScpState state = scp_optimize(nom.field, identity, ConstraintSet{}, center);
        REQUIRE(state.worst_fidelity >= nom.fidelity);
    }
    SECTION("robust identity reaches F_wc >= 0.9999 on the evaluation grid") {
        const BoxUncertainty box = delta_xz();
        const ControlField init = random_initial_field(10, 2.0, 29);
        const NominalResult nom = nominal_optimize(identity, 1.0, 2.0, init, 0.999, 5000, 29);
        const auto samples = sample_grid(box, 5, 5);
        const ScpState state = scp_optimize(nom.field, identity, ConstraintSet{}, samples);
        const FidelityReport rep = grid_metrics(state.field, identity, box, 21, 21);
        REQUIRE(rep.worst_fidelity >= 0.9999);
    }
    SECTION("accepted history is strictly increasing") {
        const BoxUncertainty box = delta_xz();
        const ControlField init = random_initial_field(10, 2.0, 31);
        const NominalResult nom = nominal_optimize(identity, 1.0, 2.0, init, 0.999, 5000, 31);
        const auto samples = sample_grid(box, 3, 3);
        ScpConfig cfg;
        cfg.max_iterations = 60;
        const ScpState state = scp_optimize(nom.field, identity, ConstraintSet{}, samples, cfg);
        double last = -1.0;
        int accepted = 0;
        for (const auto& rec : state.history) {
            if (rec.accepted) {
                REQUIRE(rec.worst_fidelity > last);
                last = rec.worst_fidelity;
                ++accepted;
            }
        }
        REQUIRE(accepted >= 1);
    }
    SECTION("identical inputs give identical iterate sequences") {
        const BoxUncertainty box = delta_xz();
        const ControlField init = random_initial_field(6, 2.0, 37);
        const auto samples = sample_grid(box, 3, 3);
        ScpConfig cfg;
        cfg.max_iterations = 25;
        const ScpState a = scp_optimize(init, identity, ConstraintSet{}, samples, cfg);
        const ScpState b = scp_optimize(init, identity, ConstraintSet{}, samples, cfg);
        REQUIRE(a.history.size() == b.history.size());
        REQUIRE((a.field.values - b.field.values).cwiseAbs().maxCoeff() == 0.0);
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            REQUIRE(a.history[i].worst_fidelity == b.history[i].worst_fidelity);
            REQUIRE(a.history[i].trust_radius == b.history[i].trust_radius);
            REQUIRE(a.history[i].accepted == b.history[i].accepted);
        }
    }
    SECTION("infeasible start is rejected") {
        ControlField bad{Eigen::VectorXd::Constant(4, 5.0), 2.0};
        ConstraintSet set;
        set.magnitude = ConstraintSet::Magnitude{-1.0, 1.0};
        const std::vector<OmegaPoint> center{{1.0, 2.0}};
        REQUIRE_THROWS_AS(scp_optimize(bad, identity, set, center), std::invalid_argument);
    }
    SECTION("constraints hold at the returned iterate") {
        const BoxUncertainty box = delta_xz();
        const ControlField init = random_initial_field(8, 2.0, 41);
        const NominalResult nom = nominal_optimize(identity, 1.0, 2.0, init, 0.999, 5000, 41);
        ConstraintSet set;
        set.fluence_bound = fluence(nom.field) * 1.05;
        set.magnitude =
            ConstraintSet::Magnitude{-2.0 * nom.field.values.cwiseAbs().maxCoeff() - 1.0,
                                     2.0 * nom.field.values.cwiseAbs().maxCoeff() + 1.0};
        const auto samples = sample_grid(box, 3, 3);
        ScpConfig cfg;
        cfg.max_iterations = 40;
        const ScpState state = scp_optimize(nom.field, identity, set, samples, cfg);
        REQUIRE(set.satisfies(state.field.values, state.field.step(), 1e-8));
    }
    SECTION("theta Hessian at a converged robust optimum is negative semidefinite") {
        const BoxUncertainty box = delta_xz();
        const ControlField init = random_initial_field(10, 2.0, 43);
        const NominalResult nom = nominal_optimize(identity, 1.0, 2.0, init, 0.999, 5000, 43);
        const auto samples = sample_grid(box, 5, 5);
        const ScpState state = scp_optimize(nom.field, identity, ConstraintSet{}, samples);
        const Eigen::MatrixXd hess =
            fidelity_hessian_theta(state.field, box.center_x, box.center_z, identity);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
        REQUIRE(es.eigenvalues().maxCoeff() < 1e-6);
    }
}
