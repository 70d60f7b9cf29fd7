// Command line front end: dataset synthesis, training, repeated inference,
// noise scans, and OpenQASM export, all driving the header library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqcgan/pqcgan.hpp"

namespace {

using namespace pqcgan;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOverrides {
    std::string config_path;
    std::string data_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<double> depol;
    std::optional<double> readout;
    std::optional<std::uint64_t> shots;
};

void add_common(CLI::App* cmd, CommonOverrides& o) {
    cmd->add_option("--config", o.config_path, "training config JSON");
    cmd->add_option("--data", o.data_path, "dataset CSV (overrides config dataset)");
    cmd->add_option("--seed", o.seed, "master seed (derives data/init/shot seeds)");
    cmd->add_option("--epochs", o.epochs, "override epoch count");
    cmd->add_option("--noise-depol", o.depol, "two-qubit depolarizing rate");
    cmd->add_option("--noise-readout", o.readout, "symmetric readout flip rate");
    cmd->add_option("--shots", o.shots, "shot count (0 selects the exact executor)");
}

TrainingConfig resolve_config(const CommonOverrides& o) {
    TrainingConfig c = o.config_path.empty() ? TrainingConfig{} : load_config(o.config_path);
    if (!o.data_path.empty()) c.dataset.path = o.data_path;
    if (o.seed) {
        c.seeds.data = rng::derive(*o.seed, 0);
        c.seeds.init = rng::derive(*o.seed, 1);
        c.seeds.shots = rng::derive(*o.seed, 2);
    }
    if (o.epochs) c.epochs = *o.epochs;
    if (o.depol || o.readout) {
        const double lam = o.depol.value_or(c.noise.two_qubit_depol);
        const double eps = o.readout.value_or(0.0);
        c.noise = NoiseModel::symmetric(lam, eps, c.n2());
    }
    if (o.shots) c.mode = *o.shots == 0 ? EvalMode::exact() : EvalMode::with_shots(*o.shots, c.seeds.shots);
    c.validate();
    return c;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

int cmd_gen_data(int classes, int pixels, double jitter, int samples, std::uint64_t seed,
                 const std::string& out) {
    const ImageDataset ds = synth_calorimeter(classes, pixels, jitter, samples, seed);
    save_csv(ds, out);
    std::printf("wrote %zu samples (%d classes, %d pixels) to %s\n", ds.images.size(), ds.n_classes,
                ds.pixels, out.c_str());
    return 0;
}

int cmd_train(const CommonOverrides& o, const std::string& out_dir) {
    const TrainingConfig config = resolve_config(o);
    const ImageDataset ds = make_dataset(config.dataset);
    std::filesystem::create_directories(out_dir);

    const RunResult run = train(config, ds);

    save_metrics_csv(run.history, out_dir + "/metrics.csv");
    save_generator(run.generator, out_dir + "/generator.json");
    save_generator(run.best_generator, out_dir + "/generator_best.json");
    save_discriminator(run.discriminator, out_dir + "/discriminator.json");
    write_json(config_to_json(config), out_dir + "/config.json");

    const MetricsRecord& last = run.history.back();
    std::printf("trained %d epochs in %.1fs: d_kl=%.3e d_kl_ind=%.3e collapsed=%s (best %.3e at epoch %d)\n",
                config.epochs, run.wall_seconds, last.d_kl, last.d_kl_ind,
                last.collapsed ? "true" : "false", [&] {
                    double m = run.history.front().d_kl;
                    for (const auto& r : run.history) m = std::min(m, r.d_kl);
                    return m;
                }(), run.best_epoch);
    return 0;
}

int cmd_infer(const CommonOverrides& o, const std::string& checkpoint, int repetitions,
              const std::string& out) {
    const TrainingConfig config = resolve_config(o);
    const ImageDataset ds = make_dataset(config.dataset);
    const DualGenerator gen = load_generator(checkpoint);
    if (gen.n2 != config.n2())
        throw ConfigError("checkpoint register size does not match the config");

    const InferenceReport rep = inference_test(gen, config.noise, repetitions, config.mode, ds);
    write_json(rep.to_json(), out);
    std::printf("d_kl x 1e2: %s   d_kl_ind x 1e2: %s   (%d repetitions, %s)\n",
                rep.d_kl_table().c_str(), rep.d_kl_ind_table().c_str(), rep.repetitions,
                rep.shot_mode ? "shot mode" : "exact");
    return 0;
}

int cmd_scan(const CommonOverrides& o, const std::string& checkpoint,
             std::vector<double> lambdas, std::vector<double> readouts,
             std::vector<std::uint64_t> seeds, bool train_under_noise, const std::string& out) {
    const TrainingConfig config = resolve_config(o);
    const ImageDataset ds = make_dataset(config.dataset);
    std::optional<DualGenerator> gen;
    if (!checkpoint.empty()) gen = load_generator(checkpoint);
    if (readouts.empty()) readouts.push_back(0.0);
    if (seeds.empty()) seeds.push_back(1);

    const std::vector<ScanRow> rows =
        noise_scan(config, gen, std::move(lambdas), std::move(readouts), std::move(seeds),
                   train_under_noise, ds);
    save_scan_csv(rows, out);
    std::printf("wrote %zu scan rows to %s\n", rows.size(), out.c_str());
    return 0;
}

int cmd_export_qasm(const CommonOverrides& o, const std::string& checkpoint,
                    const std::string& out_dir) {
    const TrainingConfig config = resolve_config(o);
    const DualGenerator gen = checkpoint.empty()
                                  ? DualGenerator::from_ansatz(config.ansatz1, config.ansatz2)
                                  : load_generator(checkpoint);
    std::filesystem::create_directories(out_dir);
    for (const auto& [circuit, theta, name] :
         {std::tuple{&gen.pqc1, &gen.theta1, "pqc1"}, std::tuple{&gen.pqc2, &gen.theta2, "pqc2"}}) {
        const std::string path = out_dir + std::string("/") + name + ".qasm";
        std::ofstream f(path);
        if (!f) throw ConfigError("cannot open " + path + " for writing");
        f << to_qasm(*circuit, *theta);
    }
    std::printf("wrote %s/pqc1.qasm and %s/pqc2.qasm\n", out_dir.c_str(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual parameterized-quantum-circuit GAN trainer and simulator"};
    app.require_subcommand(1);

    // gen-data
    auto* gen_data = app.add_subcommand("gen-data", "synthesize a calorimeter-style dataset CSV");
    int gd_classes = 4, gd_pixels = 8, gd_samples = 16;
    double gd_jitter = 0.02;
    std::uint64_t gd_seed = 1234;
    std::string gd_out = "dataset.csv";
    gen_data->add_option("--classes", gd_classes, "number of classes");
    gen_data->add_option("--pixels", gd_pixels, "pixels per image");
    gen_data->add_option("--jitter", gd_jitter, "log-normal jitter strength");
    gen_data->add_option("--samples", gd_samples, "samples per class");
    gen_data->add_option("--seed", gd_seed, "dataset seed");
    gen_data->add_option("--out", gd_out, "output CSV path");

    // train
    auto* tr = app.add_subcommand("train", "run adversarial training");
    CommonOverrides tr_o;
    std::string tr_out = "run";
    add_common(tr, tr_o);
    tr->add_option("--out", tr_out, "output directory");

    // infer
    auto* inf = app.add_subcommand("infer", "repeated inference from a checkpoint");
    CommonOverrides inf_o;
    std::string inf_checkpoint, inf_out = "inference.json";
    int inf_reps = 20;
    add_common(inf, inf_o);
    inf->add_option("--checkpoint", inf_checkpoint, "generator checkpoint JSON")->required();
    inf->add_option("--repetitions", inf_reps, "number of repetitions");
    inf->add_option("--out", inf_out, "output JSON path");

    // scan
    auto* sc = app.add_subcommand("scan", "noise hyperparameter scan");
    CommonOverrides sc_o;
    std::string sc_checkpoint, sc_out = "scan.csv";
    std::vector<double> sc_lambdas, sc_readouts;
    std::vector<std::uint64_t> sc_seeds;
    bool sc_train = false;
    add_common(sc, sc_o);
    sc->add_option("--checkpoint", sc_checkpoint, "generator checkpoint JSON");
    sc->add_option("--lambdas", sc_lambdas, "depolarizing rates")->required();
    sc->add_option("--readouts", sc_readouts, "readout flip rates");
    sc->add_option("--seeds", sc_seeds, "run seeds");
    sc->add_flag("--train", sc_train, "train per grid point instead of inference");
    sc->add_option("--out", sc_out, "output CSV path");

    // export-qasm
    auto* ex = app.add_subcommand("export-qasm", "emit OpenQASM 2.0 for both circuits");
    CommonOverrides ex_o;
    std::string ex_checkpoint, ex_out = ".";
    add_common(ex, ex_o);
    ex->add_option("--checkpoint", ex_checkpoint, "generator checkpoint JSON");
    ex->add_option("--out", ex_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*gen_data)
            return cmd_gen_data(gd_classes, gd_pixels, gd_jitter, gd_samples, gd_seed, gd_out);
        if (*tr) return cmd_train(tr_o, tr_out);
        if (*inf) return cmd_infer(inf_o, inf_checkpoint, inf_reps, inf_out);
        if (*sc)
            return cmd_scan(sc_o, sc_checkpoint, sc_lambdas, sc_readouts, sc_seeds, sc_train,
                            sc_out);
        if (*ex) return cmd_export_qasm(ex_o, ex_checkpoint, ex_out);
    } catch (const pqcgan::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const pqcgan::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
