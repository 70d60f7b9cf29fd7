#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqcgan/errors.hpp"
#include "pqcgan/linalg.hpp"
#include "pqcgan/rng.hpp"

namespace pqcgan {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kProbClamp = 1e-12;

inline double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double clamp_prob(double p) {
    return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

/// Small feedforward network scoring an image as real. Leaky-rectifier hidden
/// units (slope 0.01), logistic output in (0, 1).
struct Discriminator {
    std::vector<int> layer_sizes; // first = input width, last = 1
    std::vector<RMatrix> weights; // weights[l] is out x in for layer l
    std::vector<std::vector<double>> biases;

    std::size_t n_layers() const { return weights.size(); }

    void validate() const {
        if (layer_sizes.size() < 2) throw std::invalid_argument("Discriminator: need >= 2 layers");
        if (layer_sizes.back() != 1) throw std::invalid_argument("Discriminator: output width must be 1");
        if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
            throw std::invalid_argument("Discriminator: layer count mismatch");
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const auto out = static_cast<std::size_t>(layer_sizes[l + 1]);
            const auto in = static_cast<std::size_t>(layer_sizes[l]);
            if (weights[l].rows() != out || weights[l].cols() != in || biases[l].size() != out)
                throw std::invalid_argument("Discriminator: shape chain broken");
        }
    }

    /// Xavier-uniform initialization, deterministic under seed.
    static Discriminator init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
        Discriminator d;
        d.layer_sizes = layer_sizes;
        rng::SplitMix64 gen(seed);
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
            const auto out = static_cast<std::size_t>(layer_sizes[l + 1]);
            const auto in = static_cast<std::size_t>(layer_sizes[l]);
            RMatrix w(out, in);
            const double r = std::sqrt(6.0 / static_cast<double>(in + out));
            for (double& v : w.data()) v = gen.uniform(-r, r);
            d.weights.push_back(std::move(w));
            d.biases.emplace_back(out, 0.0);
        }
        d.validate();
        return d;
    }
};

namespace detail {

/// Pre-activations and activations per layer, kept for the backward pass.
struct ForwardTrace {
    std::vector<std::vector<double>> activations; // activations[0] = input
    std::vector<std::vector<double>> pre;         // pre[l] = W_l a_l + b_l
    double output = 0.0;                          // logistic(pre.back())
};

inline ForwardTrace forward_trace(const Discriminator& d, const std::vector<double>& image) {
    ForwardTrace t;
    t.activations.push_back(image);
    for (std::size_t l = 0; l < d.n_layers(); ++l) {
        const RMatrix& w = d.weights[l];
        std::vector<double> z(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            double acc = d.biases[l][r];
            for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * t.activations.back()[c];
            z[r] = acc;
        }
        t.pre.push_back(z);
        if (l + 1 < d.n_layers()) {
            for (double& v : z) v = v > 0.0 ? v : kLeakySlope * v;
            t.activations.push_back(std::move(z));
        }
    }
    t.output = logistic(t.pre.back()[0]);
    return t;
}

} // namespace detail

/// D(image) in (0, 1).
inline double disc_forward(const Discriminator& d, const std::vector<double>& image) {
    d.validate();
    if (image.size() != static_cast<std::size_t>(d.layer_sizes.front()))
        throw std::invalid_argument("disc_forward: input width mismatch");
    for (double v : image)
        if (!std::isfinite(v)) throw NumericError("disc_forward: non-finite input");
    return detail::forward_trace(d, image).output;
}

/// Gradients with the same shapes as the parameters.
struct DiscGradients {
    std::vector<RMatrix> d_weights;
    std::vector<std::vector<double>> d_biases;

    static DiscGradients zeros_like(const Discriminator& d) {
        DiscGradients g;
        for (std::size_t l = 0; l < d.n_layers(); ++l) {
            g.d_weights.emplace_back(d.weights[l].rows(), d.weights[l].cols());
            g.d_biases.emplace_back(d.biases[l].size(), 0.0);
        }
        return g;
    }
};

namespace detail {

/// Backward pass from d(loss)/d(logit); returns the input gradient and
/// accumulates parameter gradients.
inline std::vector<double> backward_from_logit(const Discriminator& d, const ForwardTrace& t,
                                               double dloss_dlogit, DiscGradients& acc) {
    std::vector<double> delta{dloss_dlogit};
    for (std::size_t l = d.n_layers(); l-- > 0;) {
        const RMatrix& w = d.weights[l];
        for (std::size_t r = 0; r < w.rows(); ++r) {
            acc.d_biases[l][r] += delta[r];
            for (std::size_t c = 0; c < w.cols(); ++c)
                acc.d_weights[l](r, c) += delta[r] * t.activations[l][c];
        }
        std::vector<double> prev(w.cols(), 0.0);
        for (std::size_t c = 0; c < w.cols(); ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, c) * delta[r];
            prev[c] = s;
        }
        if (l > 0)
            for (std::size_t c = 0; c < prev.size(); ++c)
                prev[c] *= t.pre[l - 1][c] > 0.0 ? 1.0 : kLeakySlope;
        delta = std::move(prev);
    }
    return delta; // gradient with respect to the input image
}

} // namespace detail

/// Exact reverse-mode gradients of the mean binary cross-entropy
/// -mean[y ln D + (1 - y) ln(1 - D)] over the batch.
inline DiscGradients disc_backprop(const Discriminator& d,
                                   const std::vector<std::vector<double>>& batch,
                                   const std::vector<double>& labels) {
    d.validate();
    if (batch.empty() || batch.size() != labels.size())
        throw std::invalid_argument("disc_backprop: batch/label size mismatch");
    DiscGradients acc = DiscGradients::zeros_like(d);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch[b].size() != static_cast<std::size_t>(d.layer_sizes.front()))
            throw std::invalid_argument("disc_backprop: input width mismatch");
        const detail::ForwardTrace t = detail::forward_trace(d, batch[b]);
        // d/d(logit) of the per-sample BCE is D - y
        detail::backward_from_logit(d, t, (t.output - labels[b]) * inv_n, acc);
    }
    return acc;
}

/// Weighted variant: gradients of sum_k weight_k * BCE_k. The weights carry
/// any normalization, so exact mixture components can enter a batch with
/// their variant probabilities instead of being resampled.
inline DiscGradients disc_backprop(const Discriminator& d,
                                   const std::vector<std::vector<double>>& batch,
                                   const std::vector<double>& labels,
                                   const std::vector<double>& sample_weights) {
    d.validate();
    if (batch.empty() || batch.size() != labels.size() || batch.size() != sample_weights.size())
        throw std::invalid_argument("disc_backprop: batch/label/weight size mismatch");
    DiscGradients acc = DiscGradients::zeros_like(d);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch[b].size() != static_cast<std::size_t>(d.layer_sizes.front()))
            throw std::invalid_argument("disc_backprop: input width mismatch");
        const detail::ForwardTrace t = detail::forward_trace(d, batch[b]);
        detail::backward_from_logit(d, t, (t.output - labels[b]) * sample_weights[b], acc);
    }
    return acc;
}

/// Gradient of ln D(image) with respect to the image. Used to push generator
/// outputs towards regions the discriminator scores as real.
inline std::vector<double> disc_log_input_gradient(const Discriminator& d,
                                                   const std::vector<double>& image) {
    d.validate();
    const detail::ForwardTrace t = detail::forward_trace(d, image);
    DiscGradients scratch = DiscGradients::zeros_like(d);
    // d ln D / d logit = 1 - D, numerically stable for D near 1
    return detail::backward_from_logit(d, t, 1.0 - t.output, scratch);
}

/// Non-saturating GAN objectives with probabilities clamped before the logs:
/// loss_D = -mean ln D(real) - mean ln(1 - D(fake)), loss_G = -mean ln D(fake).
inline std::pair<double, double> gan_losses(const Discriminator& d,
                                            const std::vector<std::vector<double>>& real_batch,
                                            const std::vector<std::vector<double>>& fake_batch) {
    if (real_batch.empty() || fake_batch.empty())
        throw std::invalid_argument("gan_losses: empty batch");
    double loss_d = 0.0, loss_g = 0.0;
    for (const auto& x : real_batch) loss_d -= std::log(clamp_prob(disc_forward(d, x)));
    loss_d /= static_cast<double>(real_batch.size());
    double fake_term = 0.0;
    for (const auto& x : fake_batch) {
        const double p = clamp_prob(disc_forward(d, x));
        fake_term -= std::log(1.0 - p);
        loss_g -= std::log(p);
    }
    loss_d += fake_term / static_cast<double>(fake_batch.size());
    loss_g /= static_cast<double>(fake_batch.size());
    return {loss_d, loss_g};
}

/// Adam accumulator state over one flat parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(std::size_t size, double alpha) {
        AdamState s;
        s.m.assign(size, 0.0);
        s.v.assign(size, 0.0);
        s.alpha = alpha;
        return s;
    }
};

/// One bias-corrected Adam update; pure function of (params, grads, state).
inline std::pair<std::vector<double>, AdamState> adam_step(const std::vector<double>& params,
                                                           const std::vector<double>& grads,
                                                           AdamState state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    std::vector<double> out = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        out[i] -= state.alpha * mhat / (std::sqrt(vhat) + state.eps);
    }
    return {std::move(out), std::move(state)};
}

inline std::vector<double> disc_flatten(const Discriminator& d) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < d.n_layers(); ++l) {
        flat.insert(flat.end(), d.weights[l].data().begin(), d.weights[l].data().end());
        flat.insert(flat.end(), d.biases[l].begin(), d.biases[l].end());
    }
    return flat;
}

inline std::vector<double> grads_flatten(const DiscGradients& g) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
        flat.insert(flat.end(), g.d_weights[l].data().begin(), g.d_weights[l].data().end());
        flat.insert(flat.end(), g.d_biases[l].begin(), g.d_biases[l].end());
    }
    return flat;
}

inline void disc_unflatten(Discriminator& d, const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (std::size_t l = 0; l < d.n_layers(); ++l) {
        for (double& v : d.weights[l].data()) v = flat[pos++];
        for (double& v : d.biases[l]) v = flat[pos++];
    }
    if (pos != flat.size()) throw std::invalid_argument("disc_unflatten: length mismatch");
}

/// Checkpoint: layer sizes plus row-major weight and bias arrays.
inline nlohmann::json discriminator_to_json(const Discriminator& d) {
    d.validate();
    nlohmann::json j;
    j["layer_sizes"] = d.layer_sizes;
    nlohmann::json ws = nlohmann::json::array();
    nlohmann::json bs = nlohmann::json::array();
    for (std::size_t l = 0; l < d.n_layers(); ++l) {
        ws.push_back(d.weights[l].data());
        bs.push_back(d.biases[l]);
    }
    j["weights"] = ws;
    j["biases"] = bs;
    return j;
}

inline Discriminator discriminator_from_json(const nlohmann::json& j) {
    Discriminator d;
    d.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    for (std::size_t l = 0; l + 1 < d.layer_sizes.size(); ++l) {
        const auto out = static_cast<std::size_t>(d.layer_sizes[l + 1]);
        const auto in = static_cast<std::size_t>(d.layer_sizes[l]);
        RMatrix w(out, in);
        w.data() = ws.at(l).get<std::vector<double>>();
        if (w.data().size() != out * in)
            throw std::invalid_argument("discriminator_from_json: weight block size mismatch");
        d.weights.push_back(std::move(w));
        d.biases.push_back(bs.at(l).get<std::vector<double>>());
    }
    d.validate();
    return d;
}

inline void save_discriminator(const Discriminator& d, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("save_discriminator: cannot open " + path);
    f << discriminator_to_json(d).dump(2) << "\n";
}

inline Discriminator load_discriminator(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("load_discriminator: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
        return discriminator_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("load_discriminator: " + path + ": " + e.what());
    }
}

} // namespace pqcgan
