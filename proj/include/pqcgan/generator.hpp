#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqcgan/errors.hpp"
#include "pqcgan/noise.hpp"

namespace pqcgan {

/// How outcome distributions are obtained: exact density-matrix evolution or
/// shot sampling via the trajectory executor.
struct EvalMode {
    enum class Kind { Exact, Shots };
    Kind kind = Kind::Exact;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static EvalMode exact() { return {}; }
    static EvalMode with_shots(std::uint64_t k, std::uint64_t seed) {
        if (k == 0) throw std::invalid_argument("EvalMode: shots must be >= 1");
        return {Kind::Shots, k, seed};
    }

    bool is_exact() const { return kind == Kind::Exact; }

    /// Same mode with a child seed; a no-op in exact mode.
    EvalMode reseeded(std::uint64_t index) const {
        EvalMode m = *this;
        if (kind == Kind::Shots) m.seed = rng::derive(seed, index);
        return m;
    }
};

/// The two-circuit generator. PQC1 on n1 qubits produces a distribution over
/// 2^n1 variants; PQC2 on n2 qubits maps variant basis state |i> to a pixel
/// distribution over 2^n2 outcomes. The coupling is a computational-basis
/// measurement: sample or enumerate i, then run PQC2 on that basis input.
struct DualGenerator {
    int n1 = 0;
    int n2 = 0;
    ParameterizedCircuit pqc1;
    ParameterizedCircuit pqc2;
    std::vector<double> theta1;
    std::vector<double> theta2;

    // carried for checkpointing when the circuits came from ansatz specs
    std::optional<AnsatzSpec> spec1;
    std::optional<AnsatzSpec> spec2;

    std::size_t n_variants() const { return std::size_t{1} << n1; }
    std::size_t n_pixels() const { return std::size_t{1} << n2; }

    void validate() const {
        if (n1 < 1 || n2 < n1) throw std::invalid_argument("DualGenerator: need n2 >= n1 >= 1");
        pqc1.validate();
        pqc2.validate();
        if (pqc1.n_qubits != n1 || pqc2.n_qubits != n2)
            throw std::invalid_argument("DualGenerator: circuit widths do not match n1/n2");
        if (theta1.size() != static_cast<std::size_t>(pqc1.n_params) ||
            theta2.size() != static_cast<std::size_t>(pqc2.n_params))
            throw std::invalid_argument("DualGenerator: parameter vector length mismatch");
    }

    static DualGenerator from_ansatz(const AnsatzSpec& s1, const AnsatzSpec& s2) {
        DualGenerator g;
        g.n1 = s1.n_qubits;
        g.n2 = s2.n_qubits;
        g.pqc1 = build_ansatz(s1);
        g.pqc2 = build_ansatz(s2);
        g.theta1.assign(static_cast<std::size_t>(g.pqc1.n_params), 0.0);
        g.theta2.assign(static_cast<std::size_t>(g.pqc2.n_params), 0.0);
        g.spec1 = s1;
        g.spec2 = s2;
        g.validate();
        return g;
    }
};

/// Everything the generator emits in one evaluation. The mean image is the
/// mixture sum w_i * I_i by construction.
struct GeneratedOutput {
    ProbabilityVector weights;
    std::vector<ProbabilityVector> individuals;
    ProbabilityVector mean_image;
};

/// PQC1 outcome distribution (variant weights) under the chosen executor.
/// Readout error is applied in both modes.
inline ProbabilityVector variant_weights(const DualGenerator& gen, const NoiseModel& noise,
                                         const EvalMode& mode) {
    gen.validate();
    const NoiseModel local = noise.for_register(gen.n1);
    if (mode.is_exact()) {
        const DensityMatrix rho =
            execute_density(gen.pqc1, gen.theta1, local, DensityMatrix::basis(gen.n1, 0));
        return apply_readout(probabilities(rho), local);
    }
    const CountHistogram h = execute_trajectories(gen.pqc1, gen.theta1, local, zero_state(gen.n1),
                                                  mode.shots, rng::derive(mode.seed, 0));
    return h.to_probabilities(gen.n_variants());
}

/// Pixel distribution of variant i: PQC2 on basis input |i> (low n1 qubits
/// carry i, the rest start in |0>), readout error applied.
inline ProbabilityVector individual_image(const DualGenerator& gen, std::size_t i,
                                          const NoiseModel& noise, const EvalMode& mode) {
    gen.validate();
    if (i >= gen.n_variants()) throw std::out_of_range("individual_image: variant index out of range");
    const NoiseModel local = noise.for_register(gen.n2);
    if (mode.is_exact()) {
        const DensityMatrix rho =
            execute_density(gen.pqc2, gen.theta2, local, DensityMatrix::basis(gen.n2, i));
        return apply_readout(probabilities(rho), local);
    }
    const CountHistogram h = execute_trajectories(gen.pqc2, gen.theta2, local,
                                                  basis_state(gen.n2, i), mode.shots,
                                                  rng::derive(mode.seed, 1 + i));
    return h.to_probabilities(gen.n_pixels());
}

/// Weights, all individual images, and their mixture mean.
inline GeneratedOutput generate(const DualGenerator& gen, const NoiseModel& noise,
                                const EvalMode& mode) {
    GeneratedOutput out;
    out.weights = variant_weights(gen, noise, mode);
    out.individuals.reserve(gen.n_variants());
    out.mean_image.probs.assign(gen.n_pixels(), 0.0);
    for (std::size_t i = 0; i < gen.n_variants(); ++i) {
        out.individuals.push_back(individual_image(gen, i, noise, mode));
        const double w = out.weights[i];
        for (std::size_t k = 0; k < gen.n_pixels(); ++k)
            out.mean_image.probs[k] += w * out.individuals[i][k];
    }
    // the weights can sum slightly away from 1 under shot noise; renormalize
    // the mixture so the mean stays a valid distribution
    const double total = out.weights.sum();
    if (total > 0.0)
        for (double& v : out.mean_image.probs) v /= total;
    return out;
}

/// Stochastic minibatch: per element, draw variant i from the exact weights,
/// then estimate I_i from shots_per_image trajectory shots.
inline std::vector<ProbabilityVector> sample_image_batch(const DualGenerator& gen,
                                                         const NoiseModel& noise, int batch,
                                                         std::uint64_t shots_per_image,
                                                         std::uint64_t seed) {
    if (batch < 1) throw std::invalid_argument("sample_image_batch: batch must be >= 1");
    const ProbabilityVector w = variant_weights(gen, noise, EvalMode::exact());
    rng::SplitMix64 pick(rng::derive(seed, 0));
    std::vector<ProbabilityVector> out;
    out.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
        const std::size_t i = pick.sample_index(w.probs);
        out.push_back(individual_image(gen, i, noise,
                                       EvalMode::with_shots(shots_per_image,
                                                            rng::derive(seed, 1 + static_cast<std::uint64_t>(b)))));
    }
    return out;
}

/// Gradient of a scalar functional with respect to the generator output,
/// treating (weights, individuals, mean) as independent coordinates. Empty
/// vectors mean zero. A functional should express its dependence either
/// through the mean or through (weights, individuals), not both.
struct OutputGradient {
    std::vector<double> d_weights;
    std::vector<std::vector<double>> d_individuals;
    std::vector<double> d_mean;
};

/// Differentiable scalar functional of a GeneratedOutput.
struct ScalarFunctional {
    std::function<double(const GeneratedOutput&)> value;
    std::function<OutputGradient(const GeneratedOutput&)> gradient;
};

enum class WhichTheta { Theta1, Theta2 };

namespace detail {

inline double contract(const OutputGradient& g, const GeneratedOutput& plus,
                       const GeneratedOutput& minus) {
    double acc = 0.0;
    if (!g.d_weights.empty())
        for (std::size_t i = 0; i < g.d_weights.size(); ++i)
            acc += g.d_weights[i] * 0.5 * (plus.weights[i] - minus.weights[i]);
    if (!g.d_individuals.empty())
        for (std::size_t i = 0; i < g.d_individuals.size(); ++i)
            for (std::size_t k = 0; k < g.d_individuals[i].size(); ++k)
                acc += g.d_individuals[i][k] * 0.5 *
                       (plus.individuals[i][k] - minus.individuals[i][k]);
    if (!g.d_mean.empty())
        for (std::size_t k = 0; k < g.d_mean.size(); ++k)
            acc += g.d_mean[k] * 0.5 * (plus.mean_image[k] - minus.mean_image[k]);
    return acc;
}

} // namespace detail

/// Two-point parameter-shift gradient of scalar_fn(generate(gen)) with respect
/// to theta1 or theta2. Exact (up to the chain rule through scalar_fn's output
/// gradient) for the exact executor with or without depolarizing noise, since
/// every output component is a single-frequency trigonometric function of each
/// Pauli-rotation angle. In shot mode each shifted evaluation draws from its
/// own derived seed.
inline std::vector<double> parameter_shift_grad(const DualGenerator& gen, const NoiseModel& noise,
                                                const ScalarFunctional& scalar_fn, WhichTheta which,
                                                const EvalMode& mode = EvalMode::exact()) {
    gen.validate();
    const GeneratedOutput base = generate(gen, noise, mode.reseeded(0));
    const double f0 = scalar_fn.value(base);
    if (!std::isfinite(f0)) throw NumericError("parameter_shift_grad: functional is not finite");
    const OutputGradient grad_out = scalar_fn.gradient(base);

    const std::vector<double>& theta = which == WhichTheta::Theta1 ? gen.theta1 : gen.theta2;
    std::vector<double> grad(theta.size(), 0.0);
    constexpr double kShift = 1.5707963267948966; // pi/2
    DualGenerator shifted = gen;
    std::vector<double>& mut = which == WhichTheta::Theta1 ? shifted.theta1 : shifted.theta2;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        mut[j] = theta[j] + kShift;
        const GeneratedOutput plus = generate(shifted, noise, mode.reseeded(2 * j + 1));
        mut[j] = theta[j] - kShift;
        const GeneratedOutput minus = generate(shifted, noise, mode.reseeded(2 * j + 2));
        mut[j] = theta[j];
        grad[j] = detail::contract(grad_out, plus, minus);
        if (!std::isfinite(grad[j]))
            throw NumericError("parameter_shift_grad: non-finite gradient component");
    }
    return grad;
}

inline nlohmann::json ansatz_to_json(const AnsatzSpec& s) {
    return {{"n_qubits", s.n_qubits}, {"depth", s.depth}, {"entanglement", entanglement_name(s.entanglement)}};
}

inline AnsatzSpec ansatz_from_json(const nlohmann::json& j) {
    AnsatzSpec s;
    s.n_qubits = j.at("n_qubits").get<int>();
    s.depth = j.at("depth").get<int>();
    s.entanglement = entanglement_from_name(j.at("entanglement").get<std::string>());
    s.validate();
    return s;
}

/// Checkpoint: ansatz specs plus bound parameter vectors.
inline nlohmann::json generator_to_json(const DualGenerator& gen) {
    gen.validate();
    if (!gen.spec1 || !gen.spec2)
        throw std::invalid_argument("generator_to_json: generator was not built from ansatz specs");
    nlohmann::json j;
    j["n1"] = gen.n1;
    j["n2"] = gen.n2;
    j["ansatz1"] = ansatz_to_json(*gen.spec1);
    j["ansatz2"] = ansatz_to_json(*gen.spec2);
    j["theta1"] = gen.theta1;
    j["theta2"] = gen.theta2;
    return j;
}

inline DualGenerator generator_from_json(const nlohmann::json& j) {
    DualGenerator g = DualGenerator::from_ansatz(ansatz_from_json(j.at("ansatz1")),
                                                 ansatz_from_json(j.at("ansatz2")));
    if (j.at("n1").get<int>() != g.n1 || j.at("n2").get<int>() != g.n2)
        throw std::invalid_argument("generator_from_json: register sizes disagree with ansatz specs");
    g.theta1 = j.at("theta1").get<std::vector<double>>();
    g.theta2 = j.at("theta2").get<std::vector<double>>();
    g.validate();
    return g;
}

inline void save_generator(const DualGenerator& gen, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("save_generator: cannot open " + path);
    f << generator_to_json(gen).dump(2) << "\n";
}

inline DualGenerator load_generator(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("load_generator: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
        return generator_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("load_generator: " + path + ": " + e.what());
    }
}

} // namespace pqcgan
