#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqcgan/circuit.hpp"
#include "pqcgan/state.hpp"

namespace pqcgan {

/// Classical readout confusion for one qubit: eps01 = P(read 1 | true 0),
/// eps10 = P(read 0 | true 1).
struct ReadoutError {
    double eps01 = 0.0;
    double eps10 = 0.0;

    void validate() const {
        if (!(eps01 >= 0.0 && eps01 <= 0.5) || !(eps10 >= 0.0 && eps10 <= 0.5))
            throw std::invalid_argument("ReadoutError: rates must lie in [0, 0.5]");
    }
};

/// Two-qubit depolarizing gate error attached to every CX, plus per-qubit
/// readout confusion. Single-qubit gates are treated as ideal.
struct NoiseModel {
    double two_qubit_depol = 0.0;
    std::vector<ReadoutError> readout;

    void validate() const {
        if (!(two_qubit_depol >= 0.0 && two_qubit_depol <= 1.0))
            throw std::invalid_argument("NoiseModel: depolarizing parameter must lie in [0, 1]");
        for (const ReadoutError& r : readout) r.validate();
    }

    bool has_readout_error() const {
        for (const ReadoutError& r : readout)
            if (r.eps01 != 0.0 || r.eps10 != 0.0) return true;
        return false;
    }

    static NoiseModel ideal(int n_qubits) {
        NoiseModel m;
        m.readout.assign(static_cast<std::size_t>(n_qubits), ReadoutError{});
        return m;
    }

    /// One lambda plus one symmetric readout rate per qubit, the shape device
    /// calibration tables publish.
    static NoiseModel symmetric(double lambda, double readout_eps, int n_qubits) {
        NoiseModel m;
        m.two_qubit_depol = lambda;
        m.readout.assign(static_cast<std::size_t>(n_qubits), ReadoutError{readout_eps, readout_eps});
        m.validate();
        return m;
    }

    /// Readout entries for a register of n qubits. An empty table means ideal
    /// readout; a larger table is truncated to its first n entries.
    std::vector<ReadoutError> readout_for(int n_qubits) const {
        const std::size_t n = static_cast<std::size_t>(n_qubits);
        if (readout.empty()) return std::vector<ReadoutError>(n, ReadoutError{});
        if (readout.size() < n)
            throw std::invalid_argument("NoiseModel: fewer readout entries than qubits");
        return {readout.begin(), readout.begin() + static_cast<std::ptrdiff_t>(n)};
    }

    /// Same gate error, readout table cut to the given register width.
    NoiseModel for_register(int n_qubits) const {
        NoiseModel m;
        m.two_qubit_depol = two_qubit_depol;
        m.readout = readout_for(n_qubits);
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["two_qubit_depol"] = two_qubit_depol;
        nlohmann::json arr = nlohmann::json::array();
        for (const ReadoutError& r : readout) arr.push_back({r.eps01, r.eps10});
        j["readout"] = arr;
        return j;
    }

    static NoiseModel from_json(const nlohmann::json& j) {
        NoiseModel m;
        m.two_qubit_depol = j.at("two_qubit_depol").get<double>();
        for (const auto& pair : j.at("readout")) {
            if (!pair.is_array() || pair.size() != 2)
                throw std::invalid_argument("NoiseModel: readout entries must be [eps01, eps10]");
            m.readout.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
        m.validate();
        return m;
    }
};

/// Kraus operators of one channel; sum K^dagger K = I within 1e-8.
struct KrausSet {
    std::vector<CMatrix> ops;

    void validate(double tol = 1e-8) const {
        if (!is_cptp(ops, tol)) throw std::invalid_argument("KrausSet: not trace preserving");
    }
};

namespace detail {

inline std::vector<CMatrix> pauli_matrices() {
    CMatrix X(2, 2), Y(2, 2), Z(2, 2);
    X(0, 1) = 1.0;
    X(1, 0) = 1.0;
    Y(0, 1) = cplx{0.0, -1.0};
    Y(1, 0) = cplx{0.0, 1.0};
    Z(0, 0) = 1.0;
    Z(1, 1) = -1.0;
    return {CMatrix::identity(2), X, Y, Z};
}

} // namespace detail

/// Depolarizing channel on k qubits: rho -> (1 - lambda) rho + lambda I/2^k.
/// Kraus form: sqrt(1 - (4^k - 1) lambda / 4^k) I plus sqrt(lambda / 4^k) P
/// for every non-identity Pauli string P.
inline KrausSet depolarizing_kraus(double lambda, int k_qubits) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("depolarizing_kraus: lambda must lie in [0, 1]");
    if (k_qubits != 1 && k_qubits != 2)
        throw std::invalid_argument("depolarizing_kraus: k_qubits must be 1 or 2");
    const auto paulis = detail::pauli_matrices();
    const double dim4 = std::pow(4.0, k_qubits);
    const double w_id = std::sqrt(1.0 - (dim4 - 1.0) * lambda / dim4);
    const double w_p = std::sqrt(lambda / dim4);

    KrausSet set;
    const std::size_t d = std::size_t{1} << k_qubits;
    CMatrix k0 = CMatrix::identity(d);
    for (cplx& v : k0.data()) v *= w_id;
    set.ops.push_back(std::move(k0));
    if (lambda > 0.0) {
        if (k_qubits == 1) {
            for (std::size_t p = 1; p < 4; ++p) {
                CMatrix m = paulis[p];
                for (cplx& v : m.data()) v *= w_p;
                set.ops.push_back(std::move(m));
            }
        } else {
            for (std::size_t hi = 0; hi < 4; ++hi)
                for (std::size_t lo = 0; lo < 4; ++lo) {
                    if (hi == 0 && lo == 0) continue;
                    CMatrix m = kron(paulis[hi], paulis[lo]);
                    for (cplx& v : m.data()) v *= w_p;
                    set.ops.push_back(std::move(m));
                }
        }
    }
    set.validate();
    return set;
}

/// Exact noisy execution: unitaries act as rho -> U rho U^dagger and the
/// two-qubit depolarizing channel follows every CX on its targets. Readout
/// error is a classical process on outcome distributions and is NOT applied
/// here; see apply_readout.
inline DensityMatrix execute_density(const ParameterizedCircuit& circuit,
                                     const std::vector<double>& theta, const NoiseModel& noise,
                                     const DensityMatrix& input) {
    circuit.validate();
    noise.validate();
    if (theta.size() != static_cast<std::size_t>(circuit.n_params))
        throw std::invalid_argument("execute_density: parameter vector length mismatch");
    if (input.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("execute_density: register size mismatch");

    const KrausSet cx_noise = noise.two_qubit_depol > 0.0
                                  ? depolarizing_kraus(noise.two_qubit_depol, 2)
                                  : KrausSet{};
    DensityMatrix rho = input;
    const std::size_t dim = rho.dim();
    for (const Gate& g : circuit.gates) {
        const CMatrix u = bound_gate_matrix(g, theta);
        CMatrix next(dim, dim);
        detail::accumulate_sandwich(rho.elements, u, g.targets, next);
        rho.elements = std::move(next);
        if (g.kind == GateKind::CX && noise.two_qubit_depol > 0.0) {
            CMatrix mixed(dim, dim);
            for (const CMatrix& k : cx_noise.ops)
                detail::accumulate_sandwich(rho.elements, k, g.targets, mixed);
            rho.elements = std::move(mixed);
        }
    }
    return rho;
}

/// Confusion-matrix action on an outcome distribution:
/// p' = (tensor_q M_q) p with M_q = [[1 - eps01, eps10], [eps01, 1 - eps10]].
inline ProbabilityVector apply_readout(const ProbabilityVector& p, const NoiseModel& noise) {
    p.validate();
    noise.validate();
    int n = 0;
    while ((std::size_t{1} << n) < p.size()) ++n;
    if (noise.readout.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("apply_readout: readout entries do not match qubit count");
    ProbabilityVector out = p;
    for (int q = 0; q < n; ++q) {
        const ReadoutError& r = noise.readout[static_cast<std::size_t>(q)];
        if (r.eps01 == 0.0 && r.eps10 == 0.0) continue;
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < p.size(); ++base) {
            if (base & stride) continue;
            const double p0 = out.probs[base];
            const double p1 = out.probs[base | stride];
            out.probs[base] = (1.0 - r.eps01) * p0 + r.eps10 * p1;
            out.probs[base | stride] = r.eps01 * p0 + (1.0 - r.eps10) * p1;
        }
    }
    return out;
}

/// Monte-Carlo realization of the same noise model. Per shot, one Kraus
/// operator is sampled after each CX with probability |K psi|^2 and the state
/// renormalized; the final state is measured once and readout flips applied
/// per qubit. Shot s draws from the derived stream (seed, s), so results do
/// not depend on how shots are partitioned across workers.
inline CountHistogram execute_trajectories(const ParameterizedCircuit& circuit,
                                           const std::vector<double>& theta,
                                           const NoiseModel& noise, const StateVector& input,
                                           std::uint64_t shots, std::uint64_t seed) {
    circuit.validate();
    noise.validate();
    if (shots == 0) throw std::invalid_argument("execute_trajectories: shots must be >= 1");
    if (theta.size() != static_cast<std::size_t>(circuit.n_params))
        throw std::invalid_argument("execute_trajectories: parameter vector length mismatch");
    if (input.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("execute_trajectories: register size mismatch");
    input.validate();

    const int n = circuit.n_qubits;
    const std::size_t dim = std::size_t{1} << n;
    const auto readout = noise.readout_for(n);

    // Bind gate matrices once; shots reuse them.
    std::vector<CMatrix> bound;
    bound.reserve(circuit.gates.size());
    for (const Gate& g : circuit.gates) bound.push_back(bound_gate_matrix(g, theta));
    const KrausSet cx_noise = noise.two_qubit_depol > 0.0
                                  ? depolarizing_kraus(noise.two_qubit_depol, 2)
                                  : KrausSet{};

    CountHistogram hist;
    hist.shots = shots;
    std::vector<cplx> psi(dim), trial(dim);
    std::vector<double> weights(cx_noise.ops.size());
    for (std::uint64_t s = 0; s < shots; ++s) {
        rng::SplitMix64 gen(rng::derive(seed, s));
        psi = input.amplitudes;
        for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
            const Gate& g = circuit.gates[gi];
            detail::apply_matrix_unchecked(psi, bound[gi], g.targets);
            if (g.kind == GateKind::CX && noise.two_qubit_depol > 0.0) {
                for (std::size_t k = 0; k < cx_noise.ops.size(); ++k) {
                    trial = psi;
                    detail::apply_matrix_unchecked(trial, cx_noise.ops[k], g.targets);
                    double w = 0.0;
                    for (const cplx& a : trial) w += std::norm(a);
                    weights[k] = w;
                }
                const std::size_t pick = gen.sample_index(weights);
                detail::apply_matrix_unchecked(psi, cx_noise.ops[pick], g.targets);
                const double nrm = std::sqrt(weights[pick]);
                for (cplx& a : psi) a /= nrm;
            }
        }
        // one measurement, then classical readout flips
        double u = gen.u01();
        std::size_t outcome = dim - 1;
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            acc += std::norm(psi[k]);
            if (u < acc) {
                outcome = k;
                break;
            }
        }
        for (int q = 0; q < n; ++q) {
            const ReadoutError& r = readout[static_cast<std::size_t>(q)];
            const bool bit = (outcome >> q) & 1u;
            const double flip_p = bit ? r.eps10 : r.eps01;
            if (flip_p > 0.0 && gen.u01() < flip_p) outcome ^= std::size_t{1} << q;
        }
        ++hist.counts[outcome];
    }
    return hist;
}

} // namespace pqcgan
