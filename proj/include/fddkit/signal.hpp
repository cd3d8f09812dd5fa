#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fddkit {

/// Multi-channel time series: one row per sensor, one column per sample.
struct MeasurementMatrix {
    std::vector<std::string> sensor_ids;
    std::vector<double> timestamps;          // seconds, monotone non-decreasing
    std::vector<std::vector<double>> values; // sensor_ids.size() rows, timestamps.size() columns

    std::size_t n_sensors() const { return sensor_ids.size(); }
    std::size_t n_samples() const { return timestamps.size(); }

    const std::vector<double>& channel(const std::string& sensor_id) const {
        for (std::size_t i = 0; i < sensor_ids.size(); ++i) {
            if (sensor_ids[i] == sensor_id) {
                return values[i];
            }
        }
        throw std::invalid_argument("unknown sensor id: " + sensor_id);
    }

    bool has_sensor(const std::string& sensor_id) const {
        return std::find(sensor_ids.begin(), sensor_ids.end(), sensor_id) != sensor_ids.end();
    }
};

inline void validate_matrix(const MeasurementMatrix& m) {
    if (m.values.size() != m.sensor_ids.size()) {
        throw std::invalid_argument("row count does not match sensor id count");
    }
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (m.values[i].size() != m.timestamps.size()) {
            throw std::invalid_argument("row " + std::to_string(i) + " length does not match timestamps");
        }
        for (double v : m.values[i]) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("non-finite value in channel " + m.sensor_ids[i]);
            }
        }
    }
    for (std::size_t i = 0; i + 1 < m.timestamps.size(); ++i) {
        if (m.timestamps[i + 1] < m.timestamps[i]) {
            throw std::invalid_argument("timestamps not monotone non-decreasing at index " +
                                        std::to_string(i + 1));
        }
    }
    for (std::size_t i = 0; i < m.sensor_ids.size(); ++i) {
        for (std::size_t j = i + 1; j < m.sensor_ids.size(); ++j) {
            if (m.sensor_ids[i] == m.sensor_ids[j]) {
                throw std::invalid_argument("duplicate sensor id: " + m.sensor_ids[i]);
            }
        }
    }
}

/// Per-channel value range observed in nominal training data.
struct NormalizationRange {
    double lo = -1.0;
    double hi = 1.0;
};

inline void validate_range(const NormalizationRange& r) {
    if (!(r.lo < r.hi)) {
        throw std::invalid_argument("normalization range requires lo < hi");
    }
}

/// Sliding-window correlation sequence for one sensor pair.
struct CorrelationSeries {
    std::pair<std::string, std::string> pair;
    std::size_t window_k = 0;
    std::vector<double> values; // each in [-1, 1]
};

struct SensorPair {
    std::string first;
    std::string second;

    friend bool operator==(const SensorPair& a, const SensorPair& b) {
        return a.first == b.first && a.second == b.second;
    }
    friend bool operator<(const SensorPair& a, const SensorPair& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    }
};

/// Median filter with edge replication; output has the same length as the input.
inline std::vector<double> median_filter(const std::vector<double>& series, std::size_t kernel) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw std::invalid_argument("median filter kernel must be odd and positive");
    }
    if (kernel > series.size()) {
        throw std::invalid_argument("median filter kernel exceeds series length");
    }
    if (kernel == 1) {
        return series;
    }
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel / 2);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(series.size());
    std::vector<double> out(series.size());
    std::vector<double> window(kernel);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t d = -half; d <= half; ++d) {
            const std::ptrdiff_t idx = std::clamp<std::ptrdiff_t>(i + d, 0, n - 1);
            window[static_cast<std::size_t>(d + half)] = series[static_cast<std::size_t>(idx)];
        }
        auto mid = window.begin() + half;
        std::nth_element(window.begin(), mid, window.end());
        out[static_cast<std::size_t>(i)] = *mid;
    }
    return out;
}

/// Affine map (x - lo) / (hi - lo), clamped to [0, 1].
inline std::vector<double> normalize(const std::vector<double>& series, const NormalizationRange& range) {
    validate_range(range);
    std::vector<double> out(series.size());
    const double span = range.hi - range.lo;
    for (std::size_t i = 0; i < series.size(); ++i) {
        out[i] = std::clamp((series[i] - range.lo) / span, 0.0, 1.0);
    }
    return out;
}

/// Pearson correlation extended for constant signals: both constant -> 1,
/// exactly one constant -> 0.
inline double pearson_mod(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("pearson_mod requires equal lengths");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("pearson_mod requires at least 2 samples");
    }
    const std::size_t n = x.size();
    // constancy must be detected exactly; accumulated means round, so a zero
    // sum of squared deviations cannot be relied on for flatlined signals
    const auto [min_x, max_x] = std::minmax_element(x.begin(), x.end());
    const auto [min_y, max_y] = std::minmax_element(y.begin(), y.end());
    const bool const_x = *min_x == *max_x;
    const bool const_y = *min_y == *max_y;
    if (const_x && const_y) {
        return 1.0;
    }
    if (const_x || const_y) {
        return 0.0;
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double ssx = 0.0;
    double ssy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        ssx += dx * dx;
        ssy += dy * dy;
        sxy += dx * dy;
    }
    return std::clamp(sxy / std::sqrt(ssx * ssy), -1.0, 1.0);
}

/// Correlations over all overlapping windows of size k, stride 1.
inline CorrelationSeries sliding_correlations(const std::vector<double>& x,
                                              const std::vector<double>& y,
                                              std::size_t k) {
    if (k < 2) {
        throw std::invalid_argument("window size k must be at least 2");
    }
    if (x.size() != y.size()) {
        throw std::invalid_argument("sliding_correlations requires equal lengths");
    }
    if (k > x.size()) {
        throw std::invalid_argument("window size k exceeds series length");
    }
    CorrelationSeries out;
    out.window_k = k;
    const std::size_t count = x.size() - k + 1;
    out.values.reserve(count);
    std::vector<double> wx(k);
    std::vector<double> wy(k);
    for (std::size_t t = 0; t < count; ++t) {
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(t),
                  x.begin() + static_cast<std::ptrdiff_t>(t + k), wx.begin());
        std::copy(y.begin() + static_cast<std::ptrdiff_t>(t),
                  y.begin() + static_cast<std::ptrdiff_t>(t + k), wy.begin());
        out.values.push_back(pearson_mod(wx, wy));
    }
    return out;
}

/// Unordered pairs (row order i < j) whose whole-sequence correlation exceeds kappa.
inline std::vector<SensorPair> find_correlated_pairs(const MeasurementMatrix& matrix, double kappa) {
    validate_matrix(matrix);
    if (kappa < 0.0 || kappa >= 1.0) {
        throw std::invalid_argument("kappa must lie in [0, 1)");
    }
    std::vector<SensorPair> pairs;
    for (std::size_t i = 0; i < matrix.n_sensors(); ++i) {
        for (std::size_t j = i + 1; j < matrix.n_sensors(); ++j) {
            if (pearson_mod(matrix.values[i], matrix.values[j]) > kappa) {
                pairs.push_back({matrix.sensor_ids[i], matrix.sensor_ids[j]});
            }
        }
    }
    return pairs;
}

/// Overlapping stride-1 windows of size s over a correlation series.
inline std::vector<std::vector<double>> window_stack(const CorrelationSeries& corr, std::size_t s) {
    if (s < 1) {
        throw std::invalid_argument("window size s must be positive");
    }
    if (s > corr.values.size()) {
        throw std::invalid_argument("window size s exceeds correlation series length");
    }
    const std::size_t count = corr.values.size() - s + 1;
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        out.emplace_back(corr.values.begin() + static_cast<std::ptrdiff_t>(t),
                         corr.values.begin() + static_cast<std::ptrdiff_t>(t + s));
    }
    return out;
}

}  // namespace fddkit
