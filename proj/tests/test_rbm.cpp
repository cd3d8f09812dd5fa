#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "fddkit/rbm.hpp"
#include "fddkit/rng.hpp"

using namespace fddkit;

namespace {

Rbm random_model(std::size_t nv, std::size_t nh, std::uint64_t seed, double scale = 0.5) {
    Rng rng(seed);
    Rbm m;
    m.n_visible = nv;
    m.n_hidden = nh;
    m.weights.resize(nv * nh);
    m.visible_bias.resize(nv);
    m.hidden_bias.resize(nh);
    for (double& w : m.weights) {
        w = rng.normal(0.0, scale);
    }
    for (double& b : m.visible_bias) {
        b = rng.normal(0.0, scale);
    }
    for (double& b : m.hidden_bias) {
        b = rng.normal(0.0, scale);
    }
    return m;
}

std::vector<double> random_visible(std::size_t nv, Rng& rng) {
    std::vector<double> v(nv);
    for (double& x : v) {
        x = rng.uniform();
    }
    return v;
}

}  // namespace

TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    for (double x : {1.0, 5.0, 30.0}) {
        CHECK(sigmoid(-x) == Catch::Approx(1.0 - sigmoid(x)).margin(1e-15));
    }
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(sigmoid(-1000.0) == 0.0);
}

TEST_CASE("conditional probabilities") {
    SECTION("zero weights reduce to bias terms") {
        Rbm m;
        m.n_visible = 3;
        m.n_hidden = 2;
        m.weights.assign(6, 0.0);
        m.visible_bias = {0.1, -0.2, 0.3};
        m.hidden_bias = {1.0, -1.0};
        const auto h = hidden_probs(m, {0.7, 0.2, 0.9});
        CHECK(h[0] == Catch::Approx(sigmoid(1.0)).margin(1e-15));
        CHECK(h[1] == Catch::Approx(sigmoid(-1.0)).margin(1e-15));
        const auto v = visible_probs(m, {0.4, 0.6});
        CHECK(v[0] == Catch::Approx(sigmoid(0.1)).margin(1e-15));
        CHECK(v[1] == Catch::Approx(sigmoid(-0.2)).margin(1e-15));
        CHECK(v[2] == Catch::Approx(sigmoid(0.3)).margin(1e-15));
    }
    SECTION("zero input vector reduces to bias terms") {
        const Rbm m = random_model(4, 3, 99);
        const auto h = hidden_probs(m, std::vector<double>(4, 0.0));
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(h[i] == Catch::Approx(sigmoid(m.hidden_bias[i])).margin(1e-15));
        }
        const auto v = visible_probs(m, std::vector<double>(3, 0.0));
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(v[j] == Catch::Approx(sigmoid(m.visible_bias[j])).margin(1e-15));
        }
    }
    SECTION("matches a naive double-loop recomputation") {
        const Rbm m = random_model(5, 7, 1234);
        Rng rng(4321);
        const auto v = random_visible(5, rng);
        const auto h = hidden_probs(m, v);
        for (std::size_t i = 0; i < m.n_hidden; ++i) {
            double act = m.hidden_bias[i];
            for (std::size_t j = 0; j < m.n_visible; ++j) {
                act += m.weights[i * m.n_visible + j] * v[j];
            }
            CHECK(h[i] == Catch::Approx(1.0 / (1.0 + std::exp(-act))).margin(1e-12));
        }
        const auto hv = random_visible(7, rng);
        const auto vp = visible_probs(m, hv);
        for (std::size_t j = 0; j < m.n_visible; ++j) {
            double act = m.visible_bias[j];
            for (std::size_t i = 0; i < m.n_hidden; ++i) {
                act += m.weights[i * m.n_visible + j] * hv[i];
            }
            CHECK(vp[j] == Catch::Approx(1.0 / (1.0 + std::exp(-act))).margin(1e-12));
        }
    }
    SECTION("outputs strictly inside (0,1)") {
        const Rbm m = random_model(6, 4, 7, 2.0);
        Rng rng(8);
        for (int rep = 0; rep < 50; ++rep) {
            const auto h = hidden_probs(m, random_visible(6, rng));
            for (double p : h) {
                CHECK(p > 0.0);
                CHECK(p < 1.0);
            }
        }
    }
    SECTION("dimension mismatch") {
        const Rbm m = random_model(3, 2, 5);
        CHECK_THROWS_AS(hidden_probs(m, {0.1, 0.2}), std::invalid_argument);
        CHECK_THROWS_AS(visible_probs(m, {0.1}), std::invalid_argument);
    }
}

TEST_CASE("cd_update") {
    SECTION("lr = 0 is the identity") {
        Rbm m = random_model(4, 3, 55);
        const Rbm before = m;
        Rng rng(1);
        cd_update(m, {{0.1, 0.9, 0.5, 0.0}}, 0.0, rng);
        CHECK(m.weights == before.weights);
        CHECK(m.visible_bias == before.visible_bias);
        CHECK(m.hidden_bias == before.hidden_bias);
    }
    SECTION("repeated batch equals single sample when hidden draws saturate") {
        // hidden biases large enough that every Bernoulli draw is 1
        Rbm base = random_model(3, 2, 9, 0.1);
        base.hidden_bias = {40.0, 40.0};
        const std::vector<double> v{0.2, 0.7, 0.5};

        Rbm single = base;
        Rng rng1(2);
        cd_update(single, {v}, 0.1, rng1);

        Rbm repeated = base;
        Rng rng2(2);
        cd_update(repeated, {v, v, v}, 0.1, rng2);

        for (std::size_t i = 0; i < single.weights.size(); ++i) {
            CHECK(repeated.weights[i] == Catch::Approx(single.weights[i]).margin(1e-12));
        }
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(repeated.visible_bias[j] == Catch::Approx(single.visible_bias[j]).margin(1e-12));
        }
    }
    SECTION("training on a point mass reduces reconstruction error") {
        const std::vector<double> target{1, 0, 1, 0, 1, 0};
        const std::vector<std::vector<double>> data(40, target);
        TrainConfig config;
        config.seed = 3;
        Rng rng(config.seed);
        Rbm m = init_rbm(6, 8, rng);
        const double before = reconstruction_error(m, data);
        for (int step = 0; step < 400; ++step) {
            cd_update(m, data, 0.1, rng);
        }
        const double after = reconstruction_error(m, data);
        CHECK(after < before);
    }
    SECTION("argument errors") {
        Rbm m = random_model(3, 2, 5);
        Rng rng(0);
        CHECK_THROWS_AS(cd_update(m, {}, 0.1, rng), std::invalid_argument);
        CHECK_THROWS_AS(cd_update(m, {{0.5, 0.5}}, 0.1, rng), std::invalid_argument);
        CHECK_THROWS_AS(cd_update(m, {{0.5, 0.5, 1.5}}, 0.1, rng), std::invalid_argument);
    }
}

TEST_CASE("train_rbm") {
    std::vector<std::vector<double>> data;
    Rng gen(20);
    for (int i = 0; i < 60; ++i) {
        std::vector<double> v(5);
        for (double& x : v) {
            x = gen.uniform() > 0.5 ? 0.9 : 0.1;
        }
        data.push_back(v);
    }
    TrainConfig config;
    config.epochs = 5;
    config.seed = 77;

    SECTION("deterministic under a fixed seed") {
        const Rbm a = train_rbm(data, 6, config);
        const Rbm b = train_rbm(data, 6, config);
        CHECK(a.weights == b.weights);
        CHECK(a.visible_bias == b.visible_bias);
        CHECK(a.hidden_bias == b.hidden_bias);
    }
    SECTION("one epoch moves the parameters") {
        TrainConfig one = config;
        one.epochs = 1;
        const Rbm trained = train_rbm(data, 6, one);
        Rng rng(config.seed);
        const Rbm initial = init_rbm(5, 6, rng);
        CHECK(trained.weights != initial.weights);
    }
    SECTION("empty data rejected") {
        CHECK_THROWS_AS(train_rbm({}, 6, config), std::invalid_argument);
    }
    SECTION("point-mass training halves the reconstruction error on most seeds") {
        const std::vector<double> target{0.9, 0.1, 0.8, 0.2, 0.7, 0.3, 0.9, 0.1, 0.8, 0.2};
        const std::vector<std::vector<double>> point_mass(50, target);
        int passes = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            TrainConfig c;
            c.seed = seed;
            Rng rng(seed);
            const Rbm untrained = init_rbm(10, 20, rng);
            const double before = reconstruction_error(untrained, point_mass);
            const Rbm trained = train_rbm(point_mass, 20, c);
            const double after = reconstruction_error(trained, point_mass);
            if (after < 0.5 * before) {
                ++passes;
            }
        }
        CHECK(passes >= 3);
    }
}

TEST_CASE("reconstruct") {
    SECTION("one step is visible_probs of hidden_probs") {
        const Rbm m = random_model(4, 3, 42);
        const std::vector<double> v{0.2, 0.8, 0.5, 0.1};
        const auto direct = visible_probs(m, hidden_probs(m, v));
        CHECK(reconstruct(m, v, 1) == direct);
    }
    SECTION("deterministic across calls") {
        const Rbm m = random_model(4, 3, 43);
        const std::vector<double> v{0.3, 0.6, 0.9, 0.0};
        CHECK(reconstruct(m, v, 3) == reconstruct(m, v, 3));
    }
    SECTION("well-trained point-mass model reconstructs the training vector") {
        const std::vector<double> target{0.95, 0.05, 0.95, 0.05, 0.95, 0.05};
        const std::vector<std::vector<double>> data(50, target);
        TrainConfig c;
        c.epochs = 200;
        c.learning_rate = 0.1;
        c.seed = 11;
        const Rbm m = train_rbm(data, 12, c);
        const auto recon = reconstruct(m, target, 1);
        for (std::size_t j = 0; j < target.size(); ++j) {
            CHECK(std::abs(recon[j] - target[j]) < 0.1);
        }
    }
}

TEST_CASE("reconstruction_error") {
    SECTION("invariant to data ordering") {
        const Rbm m = random_model(3, 4, 91);
        const std::vector<std::vector<double>> data{{0.1, 0.5, 0.9}, {0.8, 0.2, 0.4}, {0.0, 1.0, 0.5}};
        std::vector<std::vector<double>> reversed(data.rbegin(), data.rend());
        CHECK(reconstruction_error(m, data) ==
              Catch::Approx(reconstruction_error(m, reversed)).margin(1e-15));
    }
    SECTION("matches a hand-rolled MSE on two vectors") {
        const Rbm m = random_model(3, 2, 92);
        const std::vector<std::vector<double>> data{{0.2, 0.4, 0.6}, {0.9, 0.1, 0.5}};
        double expected = 0.0;
        for (const auto& v : data) {
            const auto r = visible_probs(m, hidden_probs(m, v));
            double sq = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                sq += (v[j] - r[j]) * (v[j] - r[j]);
            }
            expected += sq / 3.0;
        }
        expected /= 2.0;
        CHECK(reconstruction_error(m, data) == Catch::Approx(expected).margin(1e-13));
    }
}

TEST_CASE("energy-based distribution consistency") {
    // 2 visible, 2 hidden: enumerate all 16 configurations exhaustively
    const Rbm m = random_model(2, 2, 2024, 0.8);
    std::vector<std::vector<double>> binary{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    double z = 0.0;
    for (const auto& v : binary) {
        for (const auto& h : binary) {
            z += std::exp(-energy(m, v, h));
        }
    }
    double total_p = 0.0;
    for (const auto& v : binary) {
        for (const auto& h : binary) {
            total_p += std::exp(-energy(m, v, h)) / z;
        }
    }
    CHECK(total_p == Catch::Approx(1.0).margin(1e-9));

    // conditional p(h_i = 1 | v) from the energy must match hidden_probs
    for (const auto& v : binary) {
        const auto hp = hidden_probs(m, v);
        for (std::size_t i = 0; i < 2; ++i) {
            double joint_on = 0.0;
            double joint_all = 0.0;
            for (const auto& h : binary) {
                const double p = std::exp(-energy(m, v, h)) / z;
                joint_all += p;
                if (h[i] == 1.0) {
                    joint_on += p;
                }
            }
            CHECK(hp[i] == Catch::Approx(joint_on / joint_all).margin(1e-9));
        }
    }
}

TEST_CASE("rbm json round trip") {
    const Rbm m = random_model(4, 6, 314);
    const nlohmann::json j = m;
    CHECK(j.at("type") == "rbm");
    CHECK(j.at("format_version") == 1);
    const Rbm back = j.get<Rbm>();
    CHECK(back.n_visible == m.n_visible);
    CHECK(back.n_hidden == m.n_hidden);
    CHECK(back.weights == m.weights);
    CHECK(back.visible_bias == m.visible_bias);
    CHECK(back.hidden_bias == m.hidden_bias);
}
