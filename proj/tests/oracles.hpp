#pragma once

// Independent reference implementations used to check the library. These are
// deliberately written in the most literal way possible (full 2^n matrices,
// explicit superoperators, brute-force scans) so that agreement with the
// bit-indexed fast paths is meaningful.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqcgan/circuit.hpp"
#include "pqcgan/noise.hpp"

namespace oracle {

using pqcgan::CMatrix;
using pqcgan::cplx;

// Embed a k-qubit gate acting on `targets` into the full 2^n unitary by the
// textbook definition: for every pair of local patterns (i, j), the entry
// u(i, j) connects all global states that agree outside the targets.
inline CMatrix embed_gate(const CMatrix& u, const std::vector<int>& targets, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const std::size_t local = std::size_t{1} << targets.size();
    if (u.rows() != local || u.cols() != local) throw std::invalid_argument("embed_gate: shape");
    CMatrix full(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t j = 0;
        for (std::size_t t = 0; t < targets.size(); ++t)
            j |= ((col >> targets[t]) & 1u) << t;
        for (std::size_t i = 0; i < local; ++i) {
            std::size_t row = col;
            for (std::size_t t = 0; t < targets.size(); ++t) {
                row &= ~(std::size_t{1} << targets[t]);
                row |= ((i >> t) & 1u) << targets[t];
            }
            full(row, col) += u(i, j);
        }
    }
    return full;
}

// Full 2^n x 2^n unitary of a bound circuit, ignoring any noise.
inline CMatrix circuit_unitary(const pqcgan::ParameterizedCircuit& c,
                               const std::vector<double>& theta) {
    const std::size_t dim = std::size_t{1} << c.n_qubits;
    CMatrix u = CMatrix::identity(dim);
    for (const pqcgan::Gate& g : c.gates) {
        std::vector<int> t(g.targets.begin(), g.targets.end());
        u = pqcgan::matmul(embed_gate(pqcgan::bound_gate_matrix(g, theta), t, c.n_qubits), u);
    }
    return u;
}

// Row-major vectorization: vec(rho)[i * dim + j] = rho(i, j).
inline std::vector<cplx> vec_rho(const CMatrix& rho) {
    std::vector<cplx> v(rho.rows() * rho.cols());
    for (std::size_t i = 0; i < rho.rows(); ++i)
        for (std::size_t j = 0; j < rho.cols(); ++j) v[i * rho.cols() + j] = rho(i, j);
    return v;
}

inline CMatrix unvec_rho(const std::vector<cplx>& v, std::size_t dim) {
    CMatrix rho(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) rho(i, j) = v[i * dim + j];
    return rho;
}

// Superoperator of a Kraus channel on the full register: S = sum_K K (x) conj(K),
// acting on row-major vec(rho). Kraus operators must already be full-size.
inline std::vector<std::vector<cplx>> superop(const std::vector<CMatrix>& kraus) {
    const std::size_t dim = kraus.front().rows();
    const std::size_t d2 = dim * dim;
    std::vector<std::vector<cplx>> s(d2, std::vector<cplx>(d2, cplx{0.0, 0.0}));
    for (const CMatrix& k : kraus)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t j = 0; j < dim; ++j)
                    for (std::size_t b = 0; b < dim; ++b)
                        s[i * dim + j][a * dim + b] += k(i, a) * std::conj(k(j, b));
    return s;
}

inline CMatrix apply_superop(const std::vector<std::vector<cplx>>& s, const CMatrix& rho) {
    const std::vector<cplx> v = vec_rho(rho);
    std::vector<cplx> out(v.size(), cplx{0.0, 0.0});
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out[r] += s[r][c] * v[c];
    return unvec_rho(out, rho.rows());
}

// Channel application on a subset of qubits via embedded Kraus + superoperator.
inline CMatrix apply_channel_superop(const CMatrix& rho, const std::vector<CMatrix>& local_kraus,
                                     const std::vector<int>& targets, int n_qubits) {
    std::vector<CMatrix> full;
    for (const CMatrix& k : local_kraus) full.push_back(embed_gate(k, targets, n_qubits));
    return apply_superop(superop(full), rho);
}

// Random normalized density matrix rho = A A^dagger / tr, A with entries from
// the provided generator.
inline CMatrix random_density(std::size_t dim, pqcgan::rng::SplitMix64& gen) {
    CMatrix a(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) a(i, j) = cplx{gen.normal(), gen.normal()};
    CMatrix rho = pqcgan::matmul(a, pqcgan::adjoint(a));
    cplx tr{0.0, 0.0};
    for (std::size_t i = 0; i < dim; ++i) tr += rho(i, i);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) rho(i, j) /= tr.real();
    return rho;
}

// Eigenvalues of a Hermitian matrix via cyclic Jacobi on the real symmetric
// embedding [[Re, -Im], [Im, Re]] (every eigenvalue appears twice).
inline std::vector<double> hermitian_eigenvalues(const CMatrix& h) {
    const std::size_t n = h.rows();
    const std::size_t m = 2 * n;
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = h(i, j).real();
            a[i][n + j] = -h(i, j).imag();
            a[n + i][j] = h(i, j).imag();
            a[n + i][n + j] = h(i, j).real();
        }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
            }
    }
    std::vector<double> ev;
    for (std::size_t i = 0; i < m; ++i) ev.push_back(a[i][i]);
    std::sort(ev.begin(), ev.end());
    std::vector<double> out;
    for (std::size_t i = 0; i < m; i += 2) out.push_back(0.5 * (ev[i] + ev[i + 1]));
    return out;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

// Central finite difference of a scalar function of a parameter vector.
inline std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double orig = x[j];
        x[j] = orig + h;
        const double up = f(x);
        x[j] = orig - h;
        const double dn = f(x);
        x[j] = orig;
        g[j] = (up - dn) / (2.0 * h);
    }
    return g;
}

// Minimal OpenQASM 2.0 reader for the subset the library emits. Returns the
// parsed gate list; throws on anything unexpected.
struct QasmGate {
    std::string name;
    std::vector<int> qubits;
    double angle = 0.0;
    bool has_angle = false;
};

struct QasmProgram {
    int n_qubits = 0;
    int n_clbits = 0;
    std::vector<QasmGate> gates;
    int measurements = 0;
};

inline QasmProgram parse_qasm(const std::string& text) {
    QasmProgram prog;
    std::istringstream in(text);
    std::string line;
    bool header = false, include = false;
    auto fail = [](const std::string& l) { throw std::runtime_error("parse_qasm: " + l); };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "OPENQASM 2.0;") { header = true; continue; }
        if (line == "include \"qelib1.inc\";") { include = true; continue; }
        if (line.rfind("qreg q[", 0) == 0) {
            prog.n_qubits = std::stoi(line.substr(7));
            continue;
        }
        if (line.rfind("creg c[", 0) == 0) {
            prog.n_clbits = std::stoi(line.substr(7));
            continue;
        }
        if (line.rfind("measure q[", 0) == 0) {
            ++prog.measurements;
            continue;
        }
        QasmGate g;
        const auto paren = line.find('(');
        const auto space = line.find(' ');
        if (paren != std::string::npos && paren < space) {
            g.name = line.substr(0, paren);
            const auto close = line.find(')', paren);
            if (close == std::string::npos) fail(line);
            g.angle = std::stod(line.substr(paren + 1, close - paren - 1));
            g.has_angle = true;
        } else {
            if (space == std::string::npos) fail(line);
            g.name = line.substr(0, space);
        }
        std::size_t pos = 0;
        while ((pos = line.find("q[", pos)) != std::string::npos) {
            g.qubits.push_back(std::stoi(line.substr(pos + 2)));
            pos += 2;
        }
        if (g.qubits.empty() || line.back() != ';') fail(line);
        prog.gates.push_back(g);
    }
    if (!header || !include) fail("missing OPENQASM header or include");
    return prog;
}

} // namespace oracle
