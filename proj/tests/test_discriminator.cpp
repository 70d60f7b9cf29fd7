#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pqcgan/discriminator.hpp"

using namespace pqcgan;

namespace {

Discriminator zeroed(const std::vector<int>& sizes) {
    Discriminator d = Discriminator::init(sizes, 1);
    for (RMatrix& w : d.weights)
        for (double& v : w.data()) v = 0.0;
    for (auto& b : d.biases)
        for (double& v : b) v = 0.0;
    return d;
}

std::vector<double> random_image(std::size_t n, rng::SplitMix64& gen) {
    std::vector<double> img(n);
    double total = 0.0;
    for (double& v : img) {
        v = gen.uniform(0.0, 1.0);
        total += v;
    }
    for (double& v : img) v /= total;
    return img;
}

// mean BCE of the batch as a plain scalar function of the flat parameters
double batch_loss(Discriminator d, const std::vector<double>& flat,
                  const std::vector<std::vector<double>>& batch,
                  const std::vector<double>& labels) {
    disc_unflatten(d, flat);
    double acc = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const double p = clamp_prob(disc_forward(d, batch[b]));
        acc -= labels[b] * std::log(p) + (1.0 - labels[b]) * std::log(1.0 - p);
    }
    return acc / static_cast<double>(batch.size());
}

} // namespace

TEST_CASE("disc_forward: zero network outputs 1/2, single layer matches logistic") {
    const Discriminator zero = zeroed({8, 32, 16, 1});
    rng::SplitMix64 gen(951);
    CHECK(disc_forward(zero, random_image(8, gen)) == Catch::Approx(0.5));

    Discriminator lin = zeroed({8, 1});
    lin.weights[0](0, 0) = 1.0;
    std::vector<double> img(8, 0.0);
    img[0] = 3.0;
    CHECK(disc_forward(lin, img) == Catch::Approx(0.9525741268224334).epsilon(1e-12));
}

TEST_CASE("disc_forward output stays in (0, 1) over random draws") {
    rng::SplitMix64 gen(952);
    for (int trial = 0; trial < 1000; ++trial) {
        const Discriminator d = Discriminator::init({8, 16, 1}, gen.next());
        std::vector<double> img(8);
        for (double& v : img) v = gen.uniform(-5.0, 5.0);
        const double out = disc_forward(d, img);
        CHECK(out > 0.0);
        CHECK(out < 1.0);
    }
}

TEST_CASE("disc_forward validation") {
    const Discriminator d = Discriminator::init({8, 16, 1}, 3);
    CHECK_THROWS_AS(disc_forward(d, std::vector<double>(4, 0.1)), std::invalid_argument);
    std::vector<double> img(8, 0.1);
    img[3] = std::nan("");
    CHECK_THROWS_AS(disc_forward(d, img), NumericError);
}

TEST_CASE("Discriminator::init is deterministic and shaped correctly") {
    const Discriminator a = Discriminator::init({8, 32, 16, 1}, 42);
    const Discriminator b = Discriminator::init({8, 32, 16, 1}, 42);
    for (std::size_t l = 0; l < a.n_layers(); ++l) CHECK(a.weights[l].data() == b.weights[l].data());

    const Discriminator c = Discriminator::init({8, 32, 16, 1}, 43);
    CHECK(a.weights[0].data() != c.weights[0].data());

    CHECK(a.weights[0].rows() == 32);
    CHECK(a.weights[0].cols() == 8);
    CHECK(a.weights[2].rows() == 1);
    CHECK_THROWS_AS(Discriminator::init({8}, 1), std::invalid_argument);
    CHECK_THROWS_AS(Discriminator::init({8, 4}, 1), std::invalid_argument); // output must be 1
}

TEST_CASE("gan_losses: constant-half discriminator and near-perfect separation") {
    const Discriminator half = zeroed({4, 8, 1});
    const std::vector<std::vector<double>> real{{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}};
    const std::vector<std::vector<double>> fake{{0.0, 0.0, 1.0, 0.0}};
    const auto [loss_d, loss_g] = gan_losses(half, real, fake);
    CHECK(loss_d == Catch::Approx(2.0 * std::log(2.0)).margin(1e-12));
    CHECK(loss_g == Catch::Approx(std::log(2.0)).margin(1e-12));

    Discriminator perfect = zeroed({2, 1});
    perfect.weights[0](0, 0) = 60.0;
    perfect.weights[0](0, 1) = -60.0;
    const auto [pd, pg] = gan_losses(perfect, {{1.0, 0.0}}, {{0.0, 1.0}});
    CHECK(pd < 1e-9);
    CHECK(pg > 10.0); // the generator is maximally penalized

    CHECK_THROWS_AS(gan_losses(half, {}, fake), std::invalid_argument);
}

TEST_CASE("gan_losses matches a direct recomputation on random inputs") {
    rng::SplitMix64 gen(953);
    const Discriminator d = Discriminator::init({8, 16, 1}, 77);
    std::vector<std::vector<double>> real, fake;
    for (int i = 0; i < 3; ++i) real.push_back(random_image(8, gen));
    for (int i = 0; i < 4; ++i) fake.push_back(random_image(8, gen));

    const auto [loss_d, loss_g] = gan_losses(d, real, fake);
    double want_d = 0.0, want_g = 0.0;
    for (const auto& x : real) want_d -= std::log(clamp_prob(disc_forward(d, x))) / 3.0;
    for (const auto& x : fake) {
        const double p = clamp_prob(disc_forward(d, x));
        want_d -= std::log(1.0 - p) / 4.0;
        want_g -= std::log(p) / 4.0;
    }
    CHECK(loss_d == Catch::Approx(want_d).margin(1e-12));
    CHECK(loss_g == Catch::Approx(want_g).margin(1e-12));
}

TEST_CASE("disc_backprop matches central finite differences") {
    rng::SplitMix64 gen(954);
    const Discriminator d = Discriminator::init({8, 16, 8, 1}, 99);
    std::vector<std::vector<double>> batch;
    std::vector<double> labels;
    for (int i = 0; i < 6; ++i) {
        batch.push_back(random_image(8, gen));
        labels.push_back(i % 2 == 0 ? 1.0 : 0.0);
    }

    const std::vector<double> analytic = grads_flatten(disc_backprop(d, batch, labels));
    const std::vector<double> fd = oracle::finite_diff(
        [&](const std::vector<double>& flat) { return batch_loss(d, flat, batch, labels); },
        disc_flatten(d), 1e-6);

    REQUIRE(analytic.size() == fd.size());
    for (std::size_t i = 0; i < analytic.size(); ++i)
        CHECK(std::abs(analytic[i] - fd[i]) <= 1e-6 * std::max(1.0, std::abs(analytic[i])));
}

TEST_CASE("disc_backprop: zero network with balanced labels is stationary") {
    const Discriminator zero = zeroed({4, 8, 1});
    const std::vector<double> x{0.25, 0.25, 0.25, 0.25};
    const DiscGradients g = disc_backprop(zero, {x, x}, {0.0, 1.0});
    for (const RMatrix& w : g.d_weights)
        for (double v : w.data()) CHECK(v == Catch::Approx(0.0).margin(1e-15));
    for (const auto& b : g.d_biases)
        for (double v : b) CHECK(v == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("disc_backprop gradient shapes mirror the parameters") {
    const Discriminator d = Discriminator::init({8, 32, 16, 1}, 5);
    const DiscGradients g = disc_backprop(d, {std::vector<double>(8, 0.125)}, {1.0});
    REQUIRE(g.d_weights.size() == d.weights.size());
    for (std::size_t l = 0; l < d.n_layers(); ++l) {
        CHECK(g.d_weights[l].rows() == d.weights[l].rows());
        CHECK(g.d_weights[l].cols() == d.weights[l].cols());
        CHECK(g.d_biases[l].size() == d.biases[l].size());
    }
    CHECK_THROWS_AS(disc_backprop(d, {std::vector<double>(8, 0.125)}, {1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("weighted disc_backprop generalizes the uniform mean") {
    rng::SplitMix64 gen(955);
    const Discriminator d = Discriminator::init({8, 16, 1}, 13);
    std::vector<std::vector<double>> batch{random_image(8, gen), random_image(8, gen)};
    std::vector<double> labels{1.0, 0.0};

    const std::vector<double> plain = grads_flatten(disc_backprop(d, batch, labels));
    const std::vector<double> weighted =
        grads_flatten(disc_backprop(d, batch, labels, {0.5, 0.5}));
    for (std::size_t i = 0; i < plain.size(); ++i)
        CHECK(weighted[i] == Catch::Approx(plain[i]).margin(1e-15));

    // arbitrary weights decompose into single-sample contributions
    const std::vector<double> mix =
        grads_flatten(disc_backprop(d, batch, labels, {0.3, 0.7}));
    const std::vector<double> a =
        grads_flatten(disc_backprop(d, {batch[0]}, {labels[0]}, {0.3}));
    const std::vector<double> b =
        grads_flatten(disc_backprop(d, {batch[1]}, {labels[1]}, {0.7}));
    for (std::size_t i = 0; i < mix.size(); ++i)
        CHECK(mix[i] == Catch::Approx(a[i] + b[i]).margin(1e-12));

    CHECK_THROWS_AS(disc_backprop(d, batch, labels, {0.5}), std::invalid_argument);
}

TEST_CASE("disc_log_input_gradient matches finite differences") {
    rng::SplitMix64 gen(956);
    const Discriminator d = Discriminator::init({8, 16, 1}, 21);
    const std::vector<double> img = random_image(8, gen);
    const std::vector<double> analytic = disc_log_input_gradient(d, img);
    const std::vector<double> fd = oracle::finite_diff(
        [&](const std::vector<double>& x) { return std::log(disc_forward(d, x)); }, img, 1e-7);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(std::abs(analytic[k] - fd[k]) <= 1e-5 * std::max(1.0, std::abs(fd[k])));
}

TEST_CASE("adam_step: zero gradient, first-step magnitude, determinism") {
    const std::vector<double> params{1.0, -2.0, 3.0};
    AdamState s = AdamState::init(3, 0.01);

    const auto [same, s1] = adam_step(params, {0.0, 0.0, 0.0}, s);
    CHECK(same == params);
    CHECK(s1.step == 1);

    const std::vector<double> g{0.5, -0.25, 1e-3};
    const auto [updated, s2] = adam_step(params, g, AdamState::init(3, 0.01));
    for (std::size_t i = 0; i < 3; ++i) {
        const double step = updated[i] - params[i];
        // first step is -alpha * g / (|g| + eps), essentially -alpha * sign(g)
        CHECK(step == Catch::Approx(-0.01 * g[i] / (std::abs(g[i]) + 1e-8)).margin(1e-15));
    }
    CHECK(s2.step == 1);

    const auto [u1, x1] = adam_step(params, g, AdamState::init(3, 0.01));
    const auto [u2, x2] = adam_step(params, g, AdamState::init(3, 0.01));
    CHECK(u1 == u2);

    CHECK_THROWS_AS(adam_step(params, {1.0, std::nan(""), 0.0}, AdamState::init(3, 0.01)),
                    NumericError);
    CHECK_THROWS_AS(adam_step(params, {1.0}, AdamState::init(3, 0.01)), std::invalid_argument);
}

TEST_CASE("a lone discriminator separates two disjoint images within 500 steps") {
    Discriminator d = Discriminator::init({8, 32, 16, 1}, 7);
    AdamState opt = AdamState::init(disc_flatten(d).size(), 0.001);
    std::vector<double> real(8, 0.0), fake(8, 0.0);
    real[1] = 1.0;
    fake[6] = 1.0;
    const std::vector<std::vector<double>> batch{real, fake};
    const std::vector<double> labels{1.0, 0.0};

    bool separated = false;
    for (int step = 0; step < 500 && !separated; ++step) {
        const DiscGradients g = disc_backprop(d, batch, labels);
        auto [flat, next] = adam_step(disc_flatten(d), grads_flatten(g), opt);
        opt = std::move(next);
        disc_unflatten(d, flat);
        separated = disc_forward(d, real) > 0.5 && disc_forward(d, fake) < 0.5;
    }
    CHECK(separated);
}

TEST_CASE("discriminator JSON round trip") {
    const Discriminator d = Discriminator::init({8, 32, 16, 1}, 31);
    const Discriminator back = discriminator_from_json(discriminator_to_json(d));
    for (std::size_t l = 0; l < d.n_layers(); ++l) {
        CHECK(back.weights[l].data() == d.weights[l].data());
        CHECK(back.biases[l] == d.biases[l]);
    }

    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "pqcgan_disc_roundtrip.json";
    save_discriminator(d, path.string());
    const Discriminator loaded = load_discriminator(path.string());
    CHECK(loaded.weights[1].data() == d.weights[1].data());
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_discriminator("/nonexistent/disc.json"), ConfigError);

    nlohmann::json bad = discriminator_to_json(d);
    bad["weights"][0] = std::vector<double>{1.0, 2.0};
    CHECK_THROWS_AS(discriminator_from_json(bad), std::invalid_argument);
}

TEST_CASE("flatten and unflatten are inverse") {
    const Discriminator d = Discriminator::init({8, 16, 1}, 91);
    const std::vector<double> flat = disc_flatten(d);
    Discriminator copy = d;
    for (RMatrix& w : copy.weights)
        for (double& v : w.data()) v = 0.0;
    disc_unflatten(copy, flat);
    for (std::size_t l = 0; l < d.n_layers(); ++l)
        CHECK(copy.weights[l].data() == d.weights[l].data());
    CHECK_THROWS_AS(disc_unflatten(copy, std::vector<double>(3, 0.0)), std::invalid_argument);
}
