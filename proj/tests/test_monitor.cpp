#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fddkit/monitor.hpp"
#include "fddkit/rng.hpp"
#include "fddkit/signal.hpp"

using namespace fddkit;

namespace {

// Pair model whose GMM has a single component pinned at `mean`: it
// reconstructs every input to `mean` exactly.
PairModel point_model(const std::vector<double>& mean, std::size_t k, double delta) {
    Gmm g;
    g.n_components = 1;
    g.dim = mean.size();
    g.weights = {1.0};
    g.means = {mean};
    g.variances = {std::vector<double>(mean.size(), 0.01)};
    PairModel pm;
    pm.pair = {"a", "b"};
    pm.model = g;
    pm.input_range = {-1.0, 1.0};
    pm.k = k;
    pm.s = mean.size();
    pm.w = 3;
    pm.delta = delta;
    return pm;
}

}  // namespace

TEST_CASE("hellinger") {
    SECTION("identity of indiscernibles") {
        CHECK(hellinger({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    }
    SECTION("disjoint unit mass is exactly one") {
        CHECK(hellinger({1.0, 0.0}, {0.0, 1.0}) == 1.0);
    }
    SECTION("hand-evaluated example") {
        CHECK(hellinger({0.5, 0.5}, {0.25, 0.75}) == Catch::Approx(0.1846).margin(5e-5));
    }
    SECTION("matches the direct formula on random non-negative vectors") {
        Rng rng(41);
        for (int rep = 0; rep < 200; ++rep) {
            const std::size_t n = 1 + rng.below(12);
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.uniform();
                b[i] = rng.uniform();
            }
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum += (std::sqrt(a[i]) - std::sqrt(b[i])) * (std::sqrt(a[i]) - std::sqrt(b[i]));
            }
            const double expected = std::sqrt(0.5 * sum);
            CHECK(hellinger(a, b) == Catch::Approx(expected).margin(1e-12));
            CHECK(hellinger(a, b) == hellinger(b, a));
            CHECK(hellinger(a, b) >= 0.0);
        }
    }
    SECTION("bounded by one on probability vectors") {
        Rng rng(42);
        for (int rep = 0; rep < 100; ++rep) {
            const std::size_t n = 2 + rng.below(8);
            std::vector<double> a(n), b(n);
            double sa = 0, sb = 0;
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.uniform() + 1e-9;
                b[i] = rng.uniform() + 1e-9;
                sa += a[i];
                sb += b[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                a[i] /= sa;
                b[i] /= sb;
            }
            CHECK(hellinger(a, b) <= 1.0 + 1e-12);
        }
    }
    SECTION("argument errors") {
        CHECK_THROWS_AS(hellinger({0.5}, {0.5, 0.5}), std::invalid_argument);
        CHECK_THROWS_AS(hellinger({-0.1, 0.5}, {0.5, 0.5}), std::invalid_argument);
    }
}

TEST_CASE("residual") {
    SECTION("exact reconstruction gives zero") {
        // normalized form of an all-0.6-correlation window is 0.8
        const PairModel pm = point_model(std::vector<double>(4, 0.8), 3, 0.1);
        const std::vector<double> window(4, 0.6);
        CHECK(residual(pm, window) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("deterministic across calls") {
        const PairModel pm = point_model({0.9, 0.8, 0.7}, 3, 0.1);
        const std::vector<double> window{0.5, 0.0, -0.5};
        CHECK(residual(pm, window) == residual(pm, window));
    }
    SECTION("dimension mismatch") {
        const PairModel pm = point_model({0.9, 0.8}, 3, 0.1);
        CHECK_THROWS_AS(residual(pm, {0.1}), std::invalid_argument);
    }
    SECTION("rbm on all-ones windows flags all-zero correlations") {
        // model of perfectly correlated training windows, then a collapsed input
        const std::vector<std::vector<double>> ones(60, std::vector<double>(6, 1.0));
        TrainConfig tc;
        tc.epochs = 60;
        tc.seed = 4;
        PairModel pm;
        pm.pair = {"a", "b"};
        pm.model = train_rbm(ones, 12, tc);
        pm.k = 8;
        pm.s = 6;
        pm.w = 3;
        std::vector<double> train_res;
        for (const auto& w : ones) {
            std::vector<double> raw(w.size(), 1.0); // corr value 1 == normalized 1
            train_res.push_back(residual(pm, raw));
        }
        const Calibration cal = calibrate(train_res, 3);
        pm.mu = cal.mu;
        pm.sigma = cal.sigma;
        pm.delta = cal.delta;
        const std::vector<double> zero_corr(6, 0.0);
        CHECK(residual(pm, zero_corr) > pm.delta);
    }
}

TEST_CASE("calibrate") {
    SECTION("threshold arithmetic") {
        // residuals with mean 0.1 and population stddev 0.02
        const std::vector<double> r{0.08, 0.12};
        const Calibration c = calibrate(r, 3);
        CHECK(c.mu == Catch::Approx(0.1).margin(1e-15));
        CHECK(c.sigma == Catch::Approx(0.02).margin(1e-15));
        CHECK(c.delta == Catch::Approx(0.16).margin(1e-15));
    }
    SECTION("constant residuals give delta equal to the constant") {
        const std::vector<double> r(10, 0.05);
        const Calibration c = calibrate(r, 3);
        CHECK(c.sigma == Catch::Approx(0.0).margin(1e-12));
        CHECK(c.delta == Catch::Approx(0.05).margin(1e-12));
    }
    SECTION("matches an independent mean/stddev computation") {
        Rng rng(55);
        std::vector<double> r(500);
        for (double& x : r) {
            x = std::abs(rng.normal(0.2, 0.05));
        }
        const Calibration c = calibrate(r, 3);
        double mean = 0;
        for (double x : r) {
            mean += x;
        }
        mean /= static_cast<double>(r.size());
        double ss = 0;
        for (double x : r) {
            ss += (x - mean) * (x - mean);
        }
        const double sigma = std::sqrt(ss / static_cast<double>(r.size()));
        CHECK(c.mu == Catch::Approx(mean).margin(1e-12));
        CHECK(c.sigma == Catch::Approx(sigma).margin(1e-12));
        CHECK(c.delta == Catch::Approx(mean + 3 * sigma).margin(1e-12));
    }
    SECTION("monotone in w") {
        Rng rng(56);
        std::vector<double> r(100);
        for (double& x : r) {
            x = std::abs(rng.normal(0.2, 0.05));
        }
        double previous = 0.0;
        for (std::size_t w = 1; w <= 6; ++w) {
            const Calibration c = calibrate(r, w);
            CHECK(c.delta >= previous);
            previous = c.delta;
        }
    }
    SECTION("needs at least two residuals") {
        CHECK_THROWS_AS(calibrate({0.1}, 3), std::invalid_argument);
    }
}

TEST_CASE("classify") {
    CHECK(classify(0.16, 0.16) == Classification::nominal);
    CHECK(classify(0.16 + 1e-12, 0.16) == Classification::faulty);
    CHECK(classify(0.0, 0.0) == Classification::nominal);
    CHECK(classify(0.0, 0.5) == Classification::nominal);
    CHECK_THROWS_AS(classify(-0.1, 0.5), std::invalid_argument);
}

TEST_CASE("run_monitor") {
    // two strongly co-driven channels: sliding correlations stay near 1,
    // so a model pinned at the normalized all-ones window reconstructs well
    MeasurementMatrix m;
    m.sensor_ids = {"a", "b"};
    const std::size_t n = 80;
    m.timestamps.resize(n);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.timestamps[i] = 0.5 * static_cast<double>(i);
        const double d = std::sin(0.2 * static_cast<double>(i));
        x[i] = d;
        y[i] = 2.0 * d + 1.0;
    }
    m.values = {x, y};

    const std::size_t k = 8;
    const std::size_t s = 4;
    PairModel pm = point_model(std::vector<double>(s, 1.0), k, 0.05);

    SECTION("empty model set gives empty traces") {
        CHECK(run_monitor({}, m).empty());
    }
    SECTION("trace alignment and internal consistency") {
        MonitorSettings settings;
        settings.median_kernel = 1;
        const auto traces = run_monitor({pm}, m, settings);
        REQUIRE(traces.size() == 1);
        const AlarmTrace& trace = traces[0];
        CHECK(trace.residuals.size() == n - k - s + 2);
        CHECK(trace.sample_indices.front() == k + s - 2);
        CHECK(trace.sample_indices.back() == n - 1);
        CHECK(trace.timestamps.front() == m.timestamps[k + s - 2]);
        for (std::size_t t = 0; t < trace.residuals.size(); ++t) {
            CHECK(trace.alarms[t] == (trace.residuals[t] > trace.threshold));
        }
        // perfectly correlated channels: no alarms
        for (bool a : trace.alarms) {
            CHECK_FALSE(a);
        }
    }
    SECTION("flatlined channel alarms") {
        MeasurementMatrix faulty = m;
        std::fill(faulty.values[1].begin() + 40, faulty.values[1].end(), faulty.values[1][39]);
        MonitorSettings settings;
        settings.median_kernel = 1;
        const auto traces = run_monitor({pm}, faulty, settings);
        REQUIRE(traces.size() == 1);
        bool any = false;
        for (bool a : traces[0].alarms) {
            any |= a;
        }
        CHECK(any);
    }
    SECTION("repeated runs are identical") {
        const auto a = run_monitor({pm}, m);
        const auto b = run_monitor({pm}, m);
        REQUIRE(a.size() == b.size());
        CHECK(a[0].residuals == b[0].residuals);
        CHECK(a[0].alarms == b[0].alarms);
    }
    SECTION("missing sensor is a configuration error") {
        PairModel bad = pm;
        bad.pair = {"a", "zz"};
        CHECK_THROWS_AS(run_monitor({bad}, m), std::runtime_error);
    }
    SECTION("series too short") {
        MeasurementMatrix tiny = m;
        tiny.timestamps.resize(k + s - 2);
        tiny.values[0].resize(k + s - 2);
        tiny.values[1].resize(k + s - 2);
        CHECK_THROWS_AS(run_monitor({pm}, tiny, {1}), std::invalid_argument);
    }
}
