#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqcgan/dataset.hpp"
#include "pqcgan/discriminator.hpp"
#include "pqcgan/metrics.hpp"

namespace pqcgan {

/// Functional f(out) = KL(mean image || target); the gradient flows through
/// the mean image only.
inline ScalarFunctional kl_to_target_functional(ProbabilityVector target) {
    ScalarFunctional fn;
    fn.value = [target](const GeneratedOutput& out) { return kl_divergence(out.mean_image, target); };
    fn.gradient = [target](const GeneratedOutput& out) {
        OutputGradient g;
        g.d_mean = kl_divergence_gradient(out.mean_image, target);
        return g;
    };
    return fn;
}

/// Non-saturating generator objective against a fixed discriminator:
/// f(out) = -sum_i w_i ln D(I_i) + c * sum_i w_i ln w_i. Gradients flow to
/// the weights (through the log-scores) and to every individual image
/// (through the discriminator's input gradient), so both circuits receive
/// updates.
///
/// The plain objective (c = 0) is linear in the variant weights, so its
/// optimum over the weight simplex is always a vertex: the weight channel
/// chases whichever variant the discriminator currently favors and the
/// weights never settle. The entropy term gives the weight channel an
/// interior optimum, the usual remedy for explicit-mixture generators prone
/// to mode collapse.
inline ScalarFunctional gan_generator_functional(const Discriminator& disc,
                                                 double weight_entropy = 0.0) {
    ScalarFunctional fn;
    fn.value = [disc, weight_entropy](const GeneratedOutput& out) {
        double acc = 0.0;
        for (std::size_t i = 0; i < out.individuals.size(); ++i) {
            const double w = out.weights[i];
            acc -= w * std::log(clamp_prob(disc_forward(disc, out.individuals[i].probs)));
            if (w > 0.0) acc += weight_entropy * w * std::log(w);
        }
        return acc;
    };
    fn.gradient = [disc, weight_entropy](const GeneratedOutput& out) {
        OutputGradient g;
        g.d_weights.resize(out.individuals.size());
        g.d_individuals.resize(out.individuals.size());
        for (std::size_t i = 0; i < out.individuals.size(); ++i) {
            g.d_weights[i] = -std::log(clamp_prob(disc_forward(disc, out.individuals[i].probs)));
            if (weight_entropy > 0.0)
                g.d_weights[i] +=
                    weight_entropy * (std::log(std::max(out.weights[i], kProbClamp)) + 1.0);
            std::vector<double> dlnD = disc_log_input_gradient(disc, out.individuals[i].probs);
            for (double& v : dlnD) v *= -out.weights[i];
            g.d_individuals[i] = std::move(dlnD);
        }
        return g;
    };
    return fn;
}

/// Where the training data comes from: a CSV file when path is set, otherwise
/// the synthetic calorimeter generator.
struct DatasetSpec {
    std::string path;
    int n_classes = 4;
    int pixels = 8;
    double jitter = 0.02;
    int samples_per_class = 16;
    std::uint64_t seed = 1234;
};

inline ImageDataset make_dataset(const DatasetSpec& spec) {
    if (!spec.path.empty()) return load_csv(spec.path);
    return synth_calorimeter(spec.n_classes, spec.pixels, spec.jitter, spec.samples_per_class,
                             spec.seed);
}

struct SeedSet {
    std::uint64_t data = 11;
    std::uint64_t init = 22;
    std::uint64_t shots = 33;
};

/// Everything a run needs. One epoch is one pass over the shuffled dataset in
/// minibatches; each minibatch triggers one discriminator and one generator
/// Adam step.
struct TrainingConfig {
    AnsatzSpec ansatz1{2, 2, Entanglement::Linear};
    AnsatzSpec ansatz2{3, 3, Entanglement::Linear};
    std::vector<int> disc_layers{8, 32, 16, 1};
    int epochs = 300;
    int batch = 16;
    int eval_every = 1;
    double lr_gen = 0.01;
    double lr_disc = 0.001;
    double weight_entropy = 0.5;  // entropy bonus on variant weights, 0 = plain loss
    double init_spread = 1.0;     // generator angles start uniform in [-s, s]
    EvalMode mode = EvalMode::exact();
    NoiseModel noise;
    SeedSet seeds;
    DatasetSpec dataset;

    int n1() const { return ansatz1.n_qubits; }
    int n2() const { return ansatz2.n_qubits; }

    void validate() const {
        ansatz1.validate();
        ansatz2.validate();
        if (n1() < 1 || n2() < n1()) throw ConfigError("config: need n2 >= n1 >= 1");
        if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
        if (batch < 1) throw ConfigError("config: batch must be >= 1");
        if (eval_every < 1) throw ConfigError("config: eval_every must be >= 1");
        if (disc_layers.size() < 2 || disc_layers.back() != 1)
            throw ConfigError("config: discriminator must end in one output");
        if (disc_layers.front() != (1 << n2()))
            throw ConfigError("config: discriminator input width must be 2^n2");
        noise.validate();
    }
};

inline nlohmann::json config_to_json(const TrainingConfig& c) {
    nlohmann::json j;
    j["ansatz1"] = ansatz_to_json(c.ansatz1);
    j["ansatz2"] = ansatz_to_json(c.ansatz2);
    j["disc_layers"] = c.disc_layers;
    j["epochs"] = c.epochs;
    j["batch"] = c.batch;
    j["eval_every"] = c.eval_every;
    j["lr_gen"] = c.lr_gen;
    j["lr_disc"] = c.lr_disc;
    j["weight_entropy"] = c.weight_entropy;
    j["init_spread"] = c.init_spread;
    if (c.mode.is_exact())
        j["mode"] = "exact";
    else
        j["mode"] = {{"shots", c.mode.shots}};
    j["noise"] = c.noise.to_json();
    j["seeds"] = {{"data", c.seeds.data}, {"init", c.seeds.init}, {"shots", c.seeds.shots}};
    if (!c.dataset.path.empty()) {
        j["dataset"] = {{"path", c.dataset.path}};
    } else {
        j["dataset"] = {{"n_classes", c.dataset.n_classes},
                        {"pixels", c.dataset.pixels},
                        {"jitter", c.dataset.jitter},
                        {"samples_per_class", c.dataset.samples_per_class},
                        {"seed", c.dataset.seed}};
    }
    return j;
}

inline TrainingConfig config_from_json(const nlohmann::json& j) {
    TrainingConfig c;
    try {
        if (j.contains("ansatz1")) c.ansatz1 = ansatz_from_json(j.at("ansatz1"));
        if (j.contains("ansatz2")) c.ansatz2 = ansatz_from_json(j.at("ansatz2"));
        if (j.contains("disc_layers")) c.disc_layers = j.at("disc_layers").get<std::vector<int>>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("batch")) c.batch = j.at("batch").get<int>();
        if (j.contains("eval_every")) c.eval_every = j.at("eval_every").get<int>();
        if (j.contains("lr_gen")) c.lr_gen = j.at("lr_gen").get<double>();
        if (j.contains("lr_disc")) c.lr_disc = j.at("lr_disc").get<double>();
        if (j.contains("weight_entropy")) c.weight_entropy = j.at("weight_entropy").get<double>();
        if (j.contains("init_spread")) c.init_spread = j.at("init_spread").get<double>();
        if (j.contains("mode")) {
            const auto& m = j.at("mode");
            if (m.is_string() && m.get<std::string>() == "exact")
                c.mode = EvalMode::exact();
            else if (m.is_object() && m.contains("shots"))
                c.mode = EvalMode::with_shots(m.at("shots").get<std::uint64_t>(), 0);
            else
                throw ConfigError("config: mode must be \"exact\" or {\"shots\": k}");
        }
        if (j.contains("noise")) c.noise = NoiseModel::from_json(j.at("noise"));
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            if (s.contains("data")) c.seeds.data = s.at("data").get<std::uint64_t>();
            if (s.contains("init")) c.seeds.init = s.at("init").get<std::uint64_t>();
            if (s.contains("shots")) c.seeds.shots = s.at("shots").get<std::uint64_t>();
        }
        if (j.contains("dataset")) {
            const auto& ds = j.at("dataset");
            if (ds.contains("path")) {
                c.dataset.path = ds.at("path").get<std::string>();
            } else {
                if (ds.contains("n_classes")) c.dataset.n_classes = ds.at("n_classes").get<int>();
                if (ds.contains("pixels")) c.dataset.pixels = ds.at("pixels").get<int>();
                if (ds.contains("jitter")) c.dataset.jitter = ds.at("jitter").get<double>();
                if (ds.contains("samples_per_class"))
                    c.dataset.samples_per_class = ds.at("samples_per_class").get<int>();
                if (ds.contains("seed")) c.dataset.seed = ds.at("seed").get<std::uint64_t>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline TrainingConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("load_config: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("load_config: " + path + ": " + e.what());
    }
    return config_from_json(j);
}

/// Metrics history plus checkpoints of one training run. generator and
/// discriminator hold the last-epoch state (inference on them reproduces the
/// final history record exactly); best_generator holds the evaluated state
/// with the lowest d_kl, the checkpoint worth keeping for inference.
struct RunResult {
    std::vector<MetricsRecord> history;
    DualGenerator generator;
    Discriminator discriminator;
    DualGenerator best_generator;
    int best_epoch = 0;
    double wall_seconds = 0.0;
};

namespace detail {

inline MetricsRecord evaluate_generator(const DualGenerator& gen, const NoiseModel& noise,
                                        const ProbabilityVector& real_mean,
                                        const std::vector<ProbabilityVector>& real_individuals,
                                        int epoch) {
    const GeneratedOutput out = generate(gen, noise, EvalMode::exact());
    MetricsRecord r;
    r.epoch = epoch;
    r.d_kl = d_kl_mean(out.mean_image, real_mean);
    r.d_kl_ind = d_kl_individual(out, real_individuals);
    const auto [tv, collapsed] = mode_collapse_score(out.individuals);
    r.min_pairwise_tv = tv;
    r.collapsed = collapsed;
    return r;
}

inline void shuffle_indices(std::vector<std::size_t>& idx, rng::SplitMix64& gen) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[gen.next() % i]);
}

} // namespace detail

/// Adversarial training: per minibatch one discriminator step on real samples
/// against variants drawn from the current generator, then one generator step
/// along the parameter-shift gradient of the non-saturating objective.
/// Metrics are recorded every eval_every epochs with the exact executor under
/// the configured noise, regardless of the training mode.
inline RunResult train(const TrainingConfig& config, const ImageDataset& dataset) {
    config.validate();
    dataset.validate();
    if (dataset.pixels != (1 << config.n2()))
        throw ConfigError("train: dataset pixel count must equal 2^n2");

    const auto t0 = std::chrono::steady_clock::now();

    DualGenerator gen = DualGenerator::from_ansatz(config.ansatz1, config.ansatz2);
    {
        rng::SplitMix64 init(rng::derive(config.seeds.init, 0));
        for (double& t : gen.theta1) t = init.uniform(-config.init_spread, config.init_spread);
        for (double& t : gen.theta2) t = init.uniform(-config.init_spread, config.init_spread);
    }
    Discriminator disc = Discriminator::init(config.disc_layers, rng::derive(config.seeds.init, 1));

    AdamState gen_opt = AdamState::init(gen.theta1.size() + gen.theta2.size(), config.lr_gen);
    AdamState disc_opt = AdamState::init(disc_flatten(disc).size(), config.lr_disc);

    const ProbabilityVector real_mean = dataset_mean(dataset);
    const std::vector<ProbabilityVector> real_individuals = class_means(dataset);

    RunResult result;
    double best_kl = 0.0;
    std::vector<std::size_t> order(dataset.images.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        try {
            rng::SplitMix64 shuffle_rng(rng::derive(config.seeds.data, static_cast<std::uint64_t>(epoch)));
            detail::shuffle_indices(order, shuffle_rng);
            const std::size_t n_batches =
                (order.size() + static_cast<std::size_t>(config.batch) - 1) /
                static_cast<std::size_t>(config.batch);

            for (std::size_t b = 0; b < n_batches; ++b) {
                const std::uint64_t step_seed =
                    rng::derive(config.seeds.shots, static_cast<std::uint64_t>(epoch), b);

                // real minibatch, each sample carrying 1/|minibatch| of the
                // real-side loss mass
                std::vector<std::vector<double>> batch;
                std::vector<double> labels, sample_w;
                const std::size_t lo = b * static_cast<std::size_t>(config.batch);
                const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(config.batch));
                for (std::size_t k = lo; k < hi; ++k) {
                    batch.push_back(dataset.images[order[k]].probs);
                    labels.push_back(1.0);
                    sample_w.push_back(1.0 / static_cast<double>(hi - lo));
                }

                // fake side: the generator mixture is available in closed
                // form, so the discriminator sees every variant weighted by
                // its probability instead of a resampled batch
                const EvalMode step_mode = config.mode.is_exact()
                                               ? EvalMode::exact()
                                               : EvalMode::with_shots(config.mode.shots,
                                                                      rng::derive(step_seed, 1));
                const GeneratedOutput out = generate(gen, config.noise, step_mode);
                for (std::size_t i = 0; i < out.individuals.size(); ++i) {
                    batch.push_back(out.individuals[i].probs);
                    labels.push_back(0.0);
                    sample_w.push_back(out.weights[i]);
                }

                // discriminator step
                const DiscGradients dgrads = disc_backprop(disc, batch, labels, sample_w);
                auto [dflat, dstate] = adam_step(disc_flatten(disc), grads_flatten(dgrads), disc_opt);
                disc_opt = std::move(dstate);
                disc_unflatten(disc, dflat);

                // generator step against the updated discriminator
                const ScalarFunctional gen_loss =
                    gan_generator_functional(disc, config.weight_entropy);
                const EvalMode grad_mode = config.mode.is_exact()
                                               ? EvalMode::exact()
                                               : EvalMode::with_shots(config.mode.shots,
                                                                      rng::derive(step_seed, 3));
                const std::vector<double> g1 =
                    parameter_shift_grad(gen, config.noise, gen_loss, WhichTheta::Theta1, grad_mode);
                const std::vector<double> g2 =
                    parameter_shift_grad(gen, config.noise, gen_loss, WhichTheta::Theta2, grad_mode);

                std::vector<double> params = gen.theta1;
                params.insert(params.end(), gen.theta2.begin(), gen.theta2.end());
                std::vector<double> grads = g1;
                grads.insert(grads.end(), g2.begin(), g2.end());
                auto [gflat, gstate] = adam_step(params, grads, gen_opt);
                gen_opt = std::move(gstate);
                std::copy(gflat.begin(), gflat.begin() + static_cast<std::ptrdiff_t>(gen.theta1.size()),
                          gen.theta1.begin());
                std::copy(gflat.begin() + static_cast<std::ptrdiff_t>(gen.theta1.size()), gflat.end(),
                          gen.theta2.begin());
            }

            if (epoch % config.eval_every == 0 || epoch == config.epochs) {
                result.history.push_back(detail::evaluate_generator(gen, config.noise, real_mean,
                                                                    real_individuals, epoch));
                if (result.best_epoch == 0 || result.history.back().d_kl < best_kl) {
                    best_kl = result.history.back().d_kl;
                    result.best_generator = gen;
                    result.best_epoch = epoch;
                }
            }
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
        }
    }

    result.generator = std::move(gen);
    result.discriminator = std::move(disc);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Mean and spread of the metrics over repeated generator evaluations, the
/// repeated-inference reporting protocol. Shot mode draws a fresh derived
/// seed per repetition; exact mode repeats are identical so the spread is 0.
struct InferenceReport {
    int repetitions = 0;
    bool shot_mode = false;
    std::uint64_t shots = 0;
    double d_kl_mean = 0.0;
    double d_kl_std = 0.0;
    double d_kl_ind_mean = 0.0;
    double d_kl_ind_std = 0.0;

    /// Values scaled by 1e2 for tabular presentation.
    std::string d_kl_table() const { return format_times_1e2(d_kl_mean, d_kl_std); }
    std::string d_kl_ind_table() const { return format_times_1e2(d_kl_ind_mean, d_kl_ind_std); }

    nlohmann::json to_json() const {
        return {{"repetitions", repetitions},
                {"mode", shot_mode ? "shots" : "exact"},
                {"shots", shots},
                {"d_kl", {{"mean", d_kl_mean}, {"std", d_kl_std}, {"times_1e2", d_kl_table()}}},
                {"d_kl_ind",
                 {{"mean", d_kl_ind_mean}, {"std", d_kl_ind_std}, {"times_1e2", d_kl_ind_table()}}}};
    }
};

inline InferenceReport inference_test(const DualGenerator& checkpoint, const NoiseModel& noise,
                                      int repetitions, const EvalMode& mode,
                                      const ImageDataset& dataset) {
    if (repetitions < 2) throw std::invalid_argument("inference_test: repetitions must be >= 2");
    checkpoint.validate();
    const ProbabilityVector real_mean = dataset_mean(dataset);
    const std::vector<ProbabilityVector> real_individuals = class_means(dataset);
    std::vector<double> kl_vals, ind_vals;
    for (int rep = 0; rep < repetitions; ++rep) {
        const EvalMode rep_mode = mode.reseeded(static_cast<std::uint64_t>(rep));
        const GeneratedOutput out = generate(checkpoint, noise, rep_mode);
        kl_vals.push_back(d_kl_mean(out.mean_image, real_mean));
        ind_vals.push_back(d_kl_individual(out, real_individuals));
    }
    InferenceReport r;
    r.repetitions = repetitions;
    r.shot_mode = !mode.is_exact();
    r.shots = mode.shots;
    std::tie(r.d_kl_mean, r.d_kl_std) = summarize_repetitions(kl_vals);
    std::tie(r.d_kl_ind_mean, r.d_kl_ind_std) = summarize_repetitions(ind_vals);
    return r;
}

/// One row of a noise hyperparameter scan.
struct ScanRow {
    double lambda = 0.0;
    double readout_eps = 0.0;
    std::uint64_t seed = 0;
    double d_kl = 0.0;
    double d_kl_ind = 0.0;
    bool collapsed = false;
};

inline const char* scan_csv_header() { return "lambda,readout,seed,d_kl,d_kl_ind,collapsed"; }

inline std::string scan_csv_row(const ScanRow& r) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%llu,%.17g,%.17g,%s", r.lambda, r.readout_eps,
                  static_cast<unsigned long long>(r.seed), r.d_kl, r.d_kl_ind,
                  r.collapsed ? "true" : "false");
    return buf;
}

/// Cartesian scan over (lambda, readout) grids and seeds. With a checkpoint
/// each run is an inference evaluation under that noise; with
/// train_under_noise a full training run is launched per grid point and the
/// final history record reported. Rows come out sorted by lambda, readout,
/// seed so file contents do not depend on evaluation order.
inline std::vector<ScanRow> noise_scan(const TrainingConfig& config,
                                       const std::optional<DualGenerator>& checkpoint,
                                       std::vector<double> lambda_grid,
                                       std::vector<double> readout_grid,
                                       std::vector<std::uint64_t> seeds, bool train_under_noise,
                                       const ImageDataset& dataset) {
    if (lambda_grid.empty() || readout_grid.empty() || seeds.empty())
        throw std::invalid_argument("noise_scan: grids and seeds must be nonempty");
    if (!train_under_noise && !checkpoint)
        throw ConfigError("noise_scan: inference scan needs a checkpoint");
    std::sort(lambda_grid.begin(), lambda_grid.end());
    std::sort(readout_grid.begin(), readout_grid.end());
    std::sort(seeds.begin(), seeds.end());

    const ProbabilityVector real_mean = dataset_mean(dataset);
    const std::vector<ProbabilityVector> real_individuals = class_means(dataset);

    std::vector<ScanRow> rows;
    for (double lambda : lambda_grid)
        for (double eps : readout_grid)
            for (std::uint64_t seed : seeds) {
                const NoiseModel noise = NoiseModel::symmetric(lambda, eps, config.n2());
                ScanRow row;
                row.lambda = lambda;
                row.readout_eps = eps;
                row.seed = seed;
                MetricsRecord rec;
                if (train_under_noise) {
                    TrainingConfig run = config;
                    run.noise = noise;
                    run.seeds.data = rng::derive(seed, 0);
                    run.seeds.init = rng::derive(seed, 1);
                    run.seeds.shots = rng::derive(seed, 2);
                    rec = train(run, dataset).history.back();
                } else {
                    rec = detail::evaluate_generator(*checkpoint, noise, real_mean,
                                                     real_individuals, 0);
                }
                row.d_kl = rec.d_kl;
                row.d_kl_ind = rec.d_kl_ind;
                row.collapsed = rec.collapsed;
                rows.push_back(row);
            }
    return rows;
}

inline void save_metrics_csv(const std::vector<MetricsRecord>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("save_metrics_csv: cannot open " + path);
    f << metrics_csv_header() << "\n";
    for (const MetricsRecord& r : history) f << metrics_csv_row(r) << "\n";
}

inline void save_scan_csv(const std::vector<ScanRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("save_scan_csv: cannot open " + path);
    f << scan_csv_header() << "\n";
    for (const ScanRow& r : rows) f << scan_csv_row(r) << "\n";
}

} // namespace pqcgan
