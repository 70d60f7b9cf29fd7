#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "pqcgan/linalg.hpp"
#include "pqcgan/rng.hpp"

namespace pqcgan {

/// Desk-scale cap on register width; density matrices stay at most 256x256
/// and statevectors at most 4096 amplitudes.
inline constexpr int kMaxQubits = 12;

/// Bit ordering is little-endian throughout: qubit 0 is the least significant
/// bit of a basis-state index.

/// Pure n-qubit state, 2^n complex amplitudes with unit norm.
struct StateVector {
    int n_qubits = 0;
    std::vector<cplx> amplitudes;

    std::size_t dim() const { return amplitudes.size(); }

    double norm_sq() const {
        double s = 0.0;
        for (const cplx& a : amplitudes) s += std::norm(a);
        return s;
    }

    void validate(double tol = 1e-9) const {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw std::invalid_argument("StateVector: n_qubits out of range");
        if (amplitudes.size() != (std::size_t{1} << n_qubits))
            throw std::invalid_argument("StateVector: amplitude count is not 2^n_qubits");
        if (std::abs(norm_sq() - 1.0) > tol)
            throw std::invalid_argument("StateVector: not normalized");
    }
};

/// Mixed n-qubit state: Hermitian, unit-trace, positive semidefinite matrix.
struct DensityMatrix {
    int n_qubits = 0;
    CMatrix elements;

    std::size_t dim() const { return elements.rows(); }

    cplx trace() const {
        cplx t = 0.0;
        for (std::size_t i = 0; i < elements.rows(); ++i) t += elements(i, i);
        return t;
    }

    void validate(double tol = 1e-10) const {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw std::invalid_argument("DensityMatrix: n_qubits out of range");
        const std::size_t d = std::size_t{1} << n_qubits;
        if (elements.rows() != d || elements.cols() != d)
            throw std::invalid_argument("DensityMatrix: wrong dimension");
        if (!is_hermitian(elements, tol))
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        if (std::abs(trace() - cplx{1.0}) > tol)
            throw std::invalid_argument("DensityMatrix: trace is not 1");
    }

    static DensityMatrix from_state(const StateVector& s) {
        DensityMatrix rho;
        rho.n_qubits = s.n_qubits;
        rho.elements = CMatrix(s.dim(), s.dim());
        for (std::size_t i = 0; i < s.dim(); ++i)
            for (std::size_t j = 0; j < s.dim(); ++j)
                rho.elements(i, j) = s.amplitudes[i] * std::conj(s.amplitudes[j]);
        return rho;
    }

    /// |k><k| on n qubits.
    static DensityMatrix basis(int n_qubits, std::size_t k) {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw std::invalid_argument("DensityMatrix::basis: n_qubits out of range");
        const std::size_t d = std::size_t{1} << n_qubits;
        if (k >= d) throw std::out_of_range("DensityMatrix::basis: index out of range");
        DensityMatrix rho;
        rho.n_qubits = n_qubits;
        rho.elements = CMatrix(d, d);
        rho.elements(k, k) = 1.0;
        return rho;
    }

    /// I / 2^n.
    static DensityMatrix maximally_mixed(int n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw std::invalid_argument("DensityMatrix::maximally_mixed: n_qubits out of range");
        const std::size_t d = std::size_t{1} << n_qubits;
        DensityMatrix rho;
        rho.n_qubits = n_qubits;
        rho.elements = CMatrix(d, d);
        for (std::size_t i = 0; i < d; ++i) rho.elements(i, i) = 1.0 / static_cast<double>(d);
        return rho;
    }
};

/// Distribution over 2^m basis outcomes.
struct ProbabilityVector {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t k) const { return probs[k]; }

    double sum() const {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }

    void validate(double tol = 1e-9) const {
        if (probs.size() < 2 || (probs.size() & (probs.size() - 1)) != 0)
            throw std::invalid_argument("ProbabilityVector: length must be 2^m, m >= 1");
        for (double p : probs)
            if (!(p >= 0.0)) throw std::invalid_argument("ProbabilityVector: negative entry");
        if (std::abs(sum() - 1.0) > tol)
            throw std::invalid_argument("ProbabilityVector: does not sum to 1");
    }
};

/// Measurement outcome tally; sum of counts equals shots.
struct CountHistogram {
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t shots = 0;

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& [k, c] : counts) t += c;
        return t;
    }

    /// Empirical distribution over `dim` outcomes.
    ProbabilityVector to_probabilities(std::size_t dim) const {
        if (shots == 0) throw std::invalid_argument("CountHistogram: zero shots");
        ProbabilityVector p;
        p.probs.assign(dim, 0.0);
        for (const auto& [k, c] : counts) {
            if (k >= dim) throw std::out_of_range("CountHistogram: outcome exceeds dimension");
            p.probs[k] = static_cast<double>(c) / static_cast<double>(shots);
        }
        return p;
    }
};

namespace detail {

/// Offsets of the 2^k basis positions addressed by `targets` relative to a
/// base index whose target bits are all zero. Local bit j of the gate matrix
/// corresponds to targets[j].
inline std::vector<std::size_t> target_offsets(const std::vector<int>& targets) {
    const std::size_t g = std::size_t{1} << targets.size();
    std::vector<std::size_t> off(g, 0);
    for (std::size_t local = 0; local < g; ++local)
        for (std::size_t j = 0; j < targets.size(); ++j)
            if (local & (std::size_t{1} << j)) off[local] |= std::size_t{1} << targets[j];
    return off;
}

inline std::size_t target_mask(const std::vector<int>& targets) {
    std::size_t m = 0;
    for (int t : targets) m |= std::size_t{1} << t;
    return m;
}

inline void check_targets(const std::vector<int>& targets, int n_qubits) {
    if (targets.empty()) throw std::invalid_argument("targets: empty");
    std::size_t mask = 0;
    for (int t : targets) {
        if (t < 0 || t >= n_qubits) throw std::out_of_range("targets: qubit index out of range");
        const std::size_t bit = std::size_t{1} << t;
        if (mask & bit) throw std::invalid_argument("targets: duplicate qubit index");
        mask |= bit;
    }
}

/// In-place action of a 2^k x 2^k matrix on the addressed qubits of a
/// statevector. No unitarity check; callers own validation.
inline void apply_matrix_unchecked(std::vector<cplx>& amps, const CMatrix& u,
                                   const std::vector<int>& targets) {
    const std::size_t g = std::size_t{1} << targets.size();
    const std::size_t dim = amps.size();
    const auto off = target_offsets(targets);
    const std::size_t mask = target_mask(targets);
    std::vector<cplx> buf(g);
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & mask) continue;
        for (std::size_t l = 0; l < g; ++l) buf[l] = amps[base | off[l]];
        for (std::size_t r = 0; r < g; ++r) {
            cplx acc = 0.0;
            for (std::size_t l = 0; l < g; ++l) acc += u(r, l) * buf[l];
            amps[base | off[r]] = acc;
        }
    }
}

/// rho -> A rho A^dagger on the addressed qubits, written into `out`
/// (accumulated, so a channel can sum several Kraus terms).
inline void accumulate_sandwich(const CMatrix& rho, const CMatrix& a,
                                const std::vector<int>& targets, CMatrix& out) {
    const std::size_t g = std::size_t{1} << targets.size();
    const std::size_t dim = rho.rows();
    const auto off = target_offsets(targets);
    const std::size_t mask = target_mask(targets);

    // rows first: tmp = A rho
    CMatrix tmp(dim, dim);
    std::vector<cplx> buf(g);
    for (std::size_t col = 0; col < dim; ++col)
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & mask) continue;
            for (std::size_t l = 0; l < g; ++l) buf[l] = rho(base | off[l], col);
            for (std::size_t r = 0; r < g; ++r) {
                cplx acc = 0.0;
                for (std::size_t l = 0; l < g; ++l) acc += a(r, l) * buf[l];
                tmp(base | off[r], col) = acc;
            }
        }

    // columns with the conjugate: out += tmp A^dagger
    for (std::size_t row = 0; row < dim; ++row)
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & mask) continue;
            for (std::size_t l = 0; l < g; ++l) buf[l] = tmp(row, base | off[l]);
            for (std::size_t r = 0; r < g; ++r) {
                cplx acc = 0.0;
                for (std::size_t l = 0; l < g; ++l) acc += std::conj(a(r, l)) * buf[l];
                out(row, base | off[r]) += acc;
            }
        }
}

} // namespace detail

/// |0...0> on n qubits. n must lie in [1, 12].
inline StateVector zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw std::invalid_argument("zero_state: n_qubits must be in [1, 12]");
    StateVector s;
    s.n_qubits = n_qubits;
    s.amplitudes.assign(std::size_t{1} << n_qubits, cplx{});
    s.amplitudes[0] = 1.0;
    return s;
}

/// Basis state |k> on n qubits.
inline StateVector basis_state(int n_qubits, std::size_t k) {
    StateVector s = zero_state(n_qubits);
    if (k >= s.dim()) throw std::out_of_range("basis_state: index out of range");
    s.amplitudes[0] = 0.0;
    s.amplitudes[k] = 1.0;
    return s;
}

/// Apply a 2^k x 2^k unitary to the listed qubits. Validates unitarity to
/// 1e-10 and target sanity.
inline StateVector apply_unitary(const StateVector& state, const CMatrix& u,
                                 const std::vector<int>& targets) {
    detail::check_targets(targets, state.n_qubits);
    const std::size_t g = std::size_t{1} << targets.size();
    if (u.rows() != g || u.cols() != g)
        throw std::invalid_argument("apply_unitary: matrix size does not match target count");
    if (!is_unitary(u, 1e-10)) throw std::invalid_argument("apply_unitary: matrix is not unitary");
    StateVector out = state;
    detail::apply_matrix_unchecked(out.amplitudes, u, targets);
    return out;
}

/// Apply a unitary to a density matrix: rho -> U rho U^dagger on the targets.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u,
                                   const std::vector<int>& targets) {
    detail::check_targets(targets, rho.n_qubits);
    const std::size_t g = std::size_t{1} << targets.size();
    if (u.rows() != g || u.cols() != g)
        throw std::invalid_argument("apply_unitary: matrix size does not match target count");
    if (!is_unitary(u, 1e-10)) throw std::invalid_argument("apply_unitary: matrix is not unitary");
    DensityMatrix out;
    out.n_qubits = rho.n_qubits;
    out.elements = CMatrix(rho.dim(), rho.dim());
    detail::accumulate_sandwich(rho.elements, u, targets, out.elements);
    return out;
}

/// Kraus completeness check: sum K^dagger K = I within tol.
inline bool is_cptp(const std::vector<CMatrix>& kraus, double tol = 1e-8) {
    if (kraus.empty()) return false;
    const std::size_t d = kraus.front().rows();
    CMatrix acc(d, d);
    for (const CMatrix& k : kraus) {
        if (k.rows() != d || k.cols() != d) return false;
        const CMatrix kk = matmul(adjoint(k), k);
        for (std::size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] += kk.data()[i];
    }
    return max_abs_diff(acc, CMatrix::identity(d)) <= tol;
}

/// Apply a CPTP channel rho -> sum_K K rho K^dagger on the listed qubits.
inline DensityMatrix apply_channel(const DensityMatrix& rho, const std::vector<CMatrix>& kraus,
                                   const std::vector<int>& targets) {
    detail::check_targets(targets, rho.n_qubits);
    const std::size_t g = std::size_t{1} << targets.size();
    if (kraus.empty()) throw std::invalid_argument("apply_channel: empty Kraus set");
    for (const CMatrix& k : kraus)
        if (k.rows() != g || k.cols() != g)
            throw std::invalid_argument("apply_channel: Kraus size does not match target count");
    if (!is_cptp(kraus, 1e-8))
        throw std::invalid_argument("apply_channel: Kraus set is not trace preserving");
    DensityMatrix out;
    out.n_qubits = rho.n_qubits;
    out.elements = CMatrix(rho.dim(), rho.dim());
    for (const CMatrix& k : kraus) detail::accumulate_sandwich(rho.elements, k, targets, out.elements);
    return out;
}

/// Computational-basis outcome distribution of a pure state.
inline ProbabilityVector probabilities(const StateVector& state) {
    state.validate();
    ProbabilityVector p;
    p.probs.resize(state.dim());
    for (std::size_t k = 0; k < state.dim(); ++k) p.probs[k] = std::norm(state.amplitudes[k]);
    return p;
}

/// Diagonal of a density matrix. Tiny negative diagonal entries from channel
/// arithmetic (above -1e-9) are clamped to zero.
inline ProbabilityVector probabilities(const DensityMatrix& rho) {
    rho.validate();
    ProbabilityVector p;
    p.probs.resize(rho.dim());
    for (std::size_t k = 0; k < rho.dim(); ++k) {
        double v = rho.elements(k, k).real();
        if (v < 0.0) {
            if (v < -1e-9) throw std::invalid_argument("probabilities: negative diagonal entry");
            v = 0.0;
        }
        p.probs[k] = v;
    }
    return p;
}

/// Multinomial draw of `shots` outcomes from p, reproducible for a fixed seed.
inline CountHistogram sample_counts(const ProbabilityVector& p, std::uint64_t shots,
                                    std::uint64_t seed) {
    if (shots == 0) throw std::invalid_argument("sample_counts: shots must be >= 1");
    p.validate();
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p.probs[k];
        cdf[k] = acc;
    }
    cdf.back() = 1.0;
    rng::SplitMix64 gen(seed);
    CountHistogram h;
    h.shots = shots;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = gen.u01();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t k = static_cast<std::size_t>(it - cdf.begin());
        ++h.counts[std::min(k, p.size() - 1)];
    }
    return h;
}

/// Tensor the state with |0...0> on appended high-index qubits.
inline StateVector embed_in_larger_register(const StateVector& state, int total_qubits) {
    state.validate();
    if (total_qubits < state.n_qubits)
        throw std::invalid_argument("embed_in_larger_register: target register too small");
    if (total_qubits > kMaxQubits)
        throw std::invalid_argument("embed_in_larger_register: target register exceeds cap");
    StateVector out;
    out.n_qubits = total_qubits;
    out.amplitudes.assign(std::size_t{1} << total_qubits, cplx{});
    std::copy(state.amplitudes.begin(), state.amplitudes.end(), out.amplitudes.begin());
    return out;
}

} // namespace pqcgan
