#pragma once

#include "robustgate/qlinalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace robustgate {

/// Target unitary for gate synthesis.
struct GateTarget {
    std::string name;
    Matrix2c matrix;

    static GateTarget identity() { return {"identity", Matrix2c::Identity()}; }

    static GateTarget hadamard() {
        Matrix2c m;
        const double s = 1.0 / std::sqrt(2.0);
        m << Complex(s, 0), Complex(s, 0), Complex(s, 0), Complex(-s, 0);
        return {"hadamard", m};
    }

    /// pi/8 gate, diag(1, e^{i pi/4}).
    static GateTarget phase() {
        Matrix2c m = Matrix2c::Zero();
        m(0, 0) = Complex(1, 0);
        m(1, 1) = std::polar(1.0, M_PI / 4.0);
        return {"phase", m};
    }

    static GateTarget by_name(const std::string& name) {
        if (name == "identity") return identity();
        if (name == "hadamard") return hadamard();
        if (name == "phase") return phase();
        throw std::invalid_argument("unknown gate target: " + name);
    }
};

/// n-level system with one control operator and one noise operator,
/// H(t) = c(t) H_c + w(t) H_w.
struct NLevelModel {
    ComplexMatrix control_op;
    ComplexMatrix noise_op;

    int dim() const { return static_cast<int>(control_op.rows()); }

    void validate() const {
        detail::require_hermitian(control_op, "NLevelModel.control_op");
        detail::require_hermitian(noise_op, "NLevelModel.noise_op");
        if (control_op.rows() != noise_op.rows())
            throw std::invalid_argument("NLevelModel: operator dimensions differ");
    }

    /// The one-qubit model c(t) omega_x X + w(t) Z.
    static NLevelModel qubit_xz(double omega_x = 1.0) {
        NLevelModel m;
        m.control_op = omega_x * pauli_x();
        m.noise_op = pauli_z();
        return m;
    }
};

}  // namespace robustgate
