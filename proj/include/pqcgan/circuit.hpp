#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "pqcgan/state.hpp"

namespace pqcgan {

enum class GateKind { RX, RY, RZ, H, CX };

inline bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

inline const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::RX: return "rx";
        case GateKind::RY: return "ry";
        case GateKind::RZ: return "rz";
        case GateKind::H: return "h";
        case GateKind::CX: return "cx";
    }
    return "?";
}

/// One circuit element. Rotations carry a slot into the parameter vector;
/// CX targets are {control, target}.
struct Gate {
    GateKind kind;
    std::vector<int> targets;
    std::optional<int> param_slot;

    static Gate rx(int q, int slot) { return {GateKind::RX, {q}, slot}; }
    static Gate ry(int q, int slot) { return {GateKind::RY, {q}, slot}; }
    static Gate rz(int q, int slot) { return {GateKind::RZ, {q}, slot}; }
    static Gate h(int q) { return {GateKind::H, {q}, std::nullopt}; }
    static Gate cx(int control, int target) { return {GateKind::CX, {control, target}, std::nullopt}; }
};

/// Ordered gate list over n_qubits with n_params trainable rotation angles.
struct ParameterizedCircuit {
    int n_qubits = 0;
    std::vector<Gate> gates;
    int n_params = 0;

    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw std::invalid_argument("ParameterizedCircuit: n_qubits out of range");
        if (n_params < 0) throw std::invalid_argument("ParameterizedCircuit: negative n_params");
        std::vector<bool> used(static_cast<std::size_t>(n_params), false);
        for (const Gate& g : gates) {
            detail::check_targets(g.targets, n_qubits);
            if (is_rotation(g.kind)) {
                if (g.targets.size() != 1)
                    throw std::invalid_argument("ParameterizedCircuit: rotation needs 1 target");
                if (!g.param_slot)
                    throw std::invalid_argument("ParameterizedCircuit: rotation without slot");
                if (*g.param_slot < 0 || *g.param_slot >= n_params)
                    throw std::invalid_argument("ParameterizedCircuit: slot out of range");
                used[static_cast<std::size_t>(*g.param_slot)] = true;
            } else if (g.kind == GateKind::H) {
                if (g.targets.size() != 1 || g.param_slot)
                    throw std::invalid_argument("ParameterizedCircuit: malformed H gate");
            } else { // CX
                if (g.targets.size() != 2 || g.param_slot)
                    throw std::invalid_argument("ParameterizedCircuit: malformed CX gate");
            }
        }
        for (std::size_t s = 0; s < used.size(); ++s)
            if (!used[s]) throw std::invalid_argument("ParameterizedCircuit: unused parameter slot");
    }

    std::size_t cx_count() const {
        std::size_t n = 0;
        for (const Gate& g : gates)
            if (g.kind == GateKind::CX) ++n;
        return n;
    }
};

enum class Entanglement { Linear, Circular };

inline const char* entanglement_name(Entanglement e) {
    return e == Entanglement::Linear ? "linear" : "circular";
}

inline Entanglement entanglement_from_name(const std::string& s) {
    if (s == "linear") return Entanglement::Linear;
    if (s == "circular") return Entanglement::Circular;
    throw std::invalid_argument("entanglement_from_name: expected linear or circular");
}

/// Shape of the hardware-efficient ansatz: an RY column, then `depth` rounds
/// of a CX entangling pattern followed by another RY column.
struct AnsatzSpec {
    int n_qubits = 0;
    int depth = 0;
    Entanglement entanglement = Entanglement::Linear;

    void validate() const {
        if (n_qubits < 1) throw std::invalid_argument("AnsatzSpec: n_qubits must be >= 1");
        if (depth < 0 || depth > 64) throw std::invalid_argument("AnsatzSpec: depth must be in [0, 64]");
    }
};

/// 2x2 rotation matrices generated by the Pauli operators.
inline CMatrix rotation_matrix(GateKind kind, double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("rotation_matrix: non-finite angle");
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    CMatrix m(2, 2);
    switch (kind) {
        case GateKind::RY:
            m(0, 0) = c;
            m(0, 1) = -s;
            m(1, 0) = s;
            m(1, 1) = c;
            break;
        case GateKind::RX:
            m(0, 0) = c;
            m(0, 1) = cplx{0.0, -s};
            m(1, 0) = cplx{0.0, -s};
            m(1, 1) = c;
            break;
        case GateKind::RZ:
            m(0, 0) = cplx{c, -s};
            m(1, 1) = cplx{c, s};
            break;
        default:
            throw std::invalid_argument("rotation_matrix: not a rotation kind");
    }
    return m;
}

inline CMatrix hadamard_matrix() {
    const double r = 1.0 / std::sqrt(2.0);
    CMatrix m(2, 2);
    m(0, 0) = r;
    m(0, 1) = r;
    m(1, 0) = r;
    m(1, 1) = -r;
    return m;
}

/// CX on local bits {control = bit 0, target = bit 1}.
inline CMatrix cx_matrix() {
    CMatrix m(4, 4);
    m(0, 0) = 1.0; // |c=0,t=0>
    m(2, 2) = 1.0; // |c=0,t=1>
    m(3, 1) = 1.0; // |c=1,t=0> -> |c=1,t=1>
    m(1, 3) = 1.0;
    return m;
}

/// Matrix of a gate with its angle bound (rotations read theta[slot]).
inline CMatrix bound_gate_matrix(const Gate& g, const std::vector<double>& theta) {
    if (is_rotation(g.kind)) return rotation_matrix(g.kind, theta[static_cast<std::size_t>(*g.param_slot)]);
    if (g.kind == GateKind::H) return hadamard_matrix();
    return cx_matrix();
}

/// Deterministic hardware-efficient circuit: RY column, then per layer the
/// entangling CX pattern and another RY column. Linear entanglement is
/// CX(i, i+1); circular appends CX(n-1, 0) unless n = 2, which would repeat
/// the only pair. n_params = n_qubits * (depth + 1).
inline ParameterizedCircuit build_ansatz(const AnsatzSpec& spec) {
    spec.validate();
    ParameterizedCircuit c;
    c.n_qubits = spec.n_qubits;
    c.n_params = spec.n_qubits * (spec.depth + 1);
    int slot = 0;
    for (int q = 0; q < spec.n_qubits; ++q) c.gates.push_back(Gate::ry(q, slot++));
    for (int layer = 0; layer < spec.depth; ++layer) {
        for (int q = 0; q + 1 < spec.n_qubits; ++q) c.gates.push_back(Gate::cx(q, q + 1));
        if (spec.entanglement == Entanglement::Circular && spec.n_qubits > 2)
            c.gates.push_back(Gate::cx(spec.n_qubits - 1, 0));
        for (int q = 0; q < spec.n_qubits; ++q) c.gates.push_back(Gate::ry(q, slot++));
    }
    c.validate();
    return c;
}

/// Run a circuit with bound angles on a pure state.
inline StateVector execute(const ParameterizedCircuit& circuit, const std::vector<double>& theta,
                           const StateVector& input) {
    circuit.validate();
    if (theta.size() != static_cast<std::size_t>(circuit.n_params))
        throw std::invalid_argument("execute: parameter vector length mismatch");
    if (input.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("execute: register size mismatch");
    StateVector out = input;
    for (const Gate& g : circuit.gates)
        detail::apply_matrix_unchecked(out.amplitudes, bound_gate_matrix(g, theta), g.targets);
    return out;
}

namespace detail {

inline std::string format_angle(double theta) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", theta);
    return buf;
}

} // namespace detail

/// OpenQASM 2.0 text for the circuit with bound angles. Angles are printed
/// with 15 significant digits; a full-register measurement closes the program.
inline std::string to_qasm(const ParameterizedCircuit& circuit, const std::vector<double>& theta) {
    circuit.validate();
    if (theta.size() != static_cast<std::size_t>(circuit.n_params))
        throw std::invalid_argument("to_qasm: parameter vector length mismatch");
    for (double t : theta)
        if (!std::isfinite(t)) throw std::invalid_argument("to_qasm: non-finite angle");
    std::string out;
    out += "OPENQASM 2.0;\n";
    out += "include \"qelib1.inc\";\n";
    out += "qreg q[" + std::to_string(circuit.n_qubits) + "];\n";
    out += "creg c[" + std::to_string(circuit.n_qubits) + "];\n";
    for (const Gate& g : circuit.gates) {
        out += gate_name(g.kind);
        if (is_rotation(g.kind))
            out += "(" + detail::format_angle(theta[static_cast<std::size_t>(*g.param_slot)]) + ")";
        out += " q[" + std::to_string(g.targets[0]) + "]";
        if (g.targets.size() == 2) out += ",q[" + std::to_string(g.targets[1]) + "]";
        out += ";\n";
    }
    for (int q = 0; q < circuit.n_qubits; ++q)
        out += "measure q[" + std::to_string(q) + "] -> c[" + std::to_string(q) + "];\n";
    return out;
}

} // namespace pqcgan
