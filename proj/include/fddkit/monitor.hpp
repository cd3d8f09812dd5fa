#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fddkit/gmm.hpp"
#include "fddkit/rbm.hpp"
#include "fddkit/signal.hpp"

namespace fddkit {

/// Trained generative model for one correlated pair together with its
/// calibration. `s` equals the model input dimension.
struct PairModel {
    SensorPair pair;
    std::variant<Rbm, Gmm> model;
    NormalizationRange input_range{-1.0, 1.0};
    double mu = 0.0;     // mean training residual
    double sigma = 0.0;  // stddev of training residuals (population)
    double delta = 0.0;  // alarm threshold, mu + w * sigma
    std::size_t w = 3;
    std::size_t k = 0;   // correlation window size
    std::size_t s = 0;   // model input window size
};

/// Per-pair monitoring output. alarms[t] holds iff residuals[t] > threshold.
struct AlarmTrace {
    SensorPair pair;
    std::vector<double> timestamps;
    std::vector<std::size_t> sample_indices; // newest raw sample per residual
    std::vector<double> residuals;
    double threshold = 0.0;
    std::vector<bool> alarms;
};

/// sqrt(1/2 * sum (sqrt(a_i) - sqrt(b_i))^2). Inputs must be element-wise
/// non-negative; they are used as-is, without renormalization.
inline double hellinger(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("hellinger requires equal dimensions");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0.0 || b[i] < 0.0) {
            throw std::invalid_argument("hellinger requires non-negative elements");
        }
        const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
        total += d * d;
    }
    return std::sqrt(0.5 * total);
}

/// Residual for one raw correlation window: normalize, reconstruct through the
/// pair's model, and measure the Hellinger discrepancy.
inline double residual(const PairModel& pm, const std::vector<double>& window) {
    if (window.size() != pm.s) {
        throw std::invalid_argument("window dimension must equal the model input size");
    }
    const std::vector<double> observed = normalize(window, pm.input_range);
    std::vector<double> predicted;
    if (const Rbm* rbm = std::get_if<Rbm>(&pm.model)) {
        predicted = reconstruct(*rbm, observed, 1);
    } else {
        predicted = reconstruct(std::get<Gmm>(pm.model), observed);
    }
    return hellinger(observed, predicted);
}

struct Calibration {
    double mu = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
};

/// mu/sigma over training residuals and the threshold mu + w * sigma.
/// sigma is the population standard deviation.
inline Calibration calibrate(const std::vector<double>& train_residuals, std::size_t w) {
    if (train_residuals.size() < 2) {
        throw std::invalid_argument("calibration needs at least 2 residuals");
    }
    Calibration c;
    for (double r : train_residuals) {
        c.mu += r;
    }
    c.mu /= static_cast<double>(train_residuals.size());
    double ss = 0.0;
    for (double r : train_residuals) {
        const double d = r - c.mu;
        ss += d * d;
    }
    c.sigma = std::sqrt(ss / static_cast<double>(train_residuals.size()));
    c.delta = c.mu + static_cast<double>(w) * c.sigma;
    return c;
}

enum class Classification { nominal, faulty };

/// Nominal iff r <= delta (boundary inclusive).
inline Classification classify(double r, double delta) {
    if (r < 0.0 || delta < 0.0) {
        throw std::invalid_argument("residual and threshold must be non-negative");
    }
    return r <= delta ? Classification::nominal : Classification::faulty;
}

struct MonitorSettings {
    std::size_t median_kernel = 5;
};

/// Runs every pair model over a measurement matrix: median-filter the two
/// channels, slide correlations of size k, stack windows of size s, and
/// classify each residual. Residual t is stamped with the newest raw sample
/// contributing to it (raw index k + s - 2 + t).
inline std::vector<AlarmTrace> run_monitor(const std::vector<PairModel>& models,
                                           const MeasurementMatrix& matrix,
                                           const MonitorSettings& settings = {}) {
    validate_matrix(matrix);
    std::vector<AlarmTrace> traces;
    if (models.empty()) {
        return traces;
    }
    std::map<std::string, std::vector<double>> filtered;
    for (const auto& pm : models) {
        for (const std::string& id : {pm.pair.first, pm.pair.second}) {
            if (!matrix.has_sensor(id)) {
                throw std::runtime_error("monitored sensor '" + id + "' missing from input data");
            }
            if (!filtered.count(id)) {
                filtered[id] = median_filter(matrix.channel(id), settings.median_kernel);
            }
        }
    }
    for (const auto& pm : models) {
        const std::size_t depth = pm.k + pm.s - 1;
        if (matrix.n_samples() < depth) {
            throw std::invalid_argument("series too short: need at least k + s - 1 samples");
        }
        const CorrelationSeries corr =
            sliding_correlations(filtered.at(pm.pair.first), filtered.at(pm.pair.second), pm.k);
        const auto windows = window_stack(corr, pm.s);

        AlarmTrace trace;
        trace.pair = pm.pair;
        trace.threshold = pm.delta;
        trace.timestamps.reserve(windows.size());
        trace.sample_indices.reserve(windows.size());
        trace.residuals.reserve(windows.size());
        trace.alarms.reserve(windows.size());
        for (std::size_t t = 0; t < windows.size(); ++t) {
            const std::size_t raw_index = depth - 1 + t;
            const double r = residual(pm, windows[t]);
            trace.timestamps.push_back(matrix.timestamps[raw_index]);
            trace.sample_indices.push_back(raw_index);
            trace.residuals.push_back(r);
            trace.alarms.push_back(classify(r, pm.delta) == Classification::faulty);
        }
        traces.push_back(std::move(trace));
    }
    return traces;
}

}  // namespace fddkit
