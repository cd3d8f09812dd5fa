#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fddkit/monitor.hpp"
#include "fddkit/rng.hpp"
#include "fddkit/signal.hpp"

namespace fddkit {

enum class FaultKind { disconnect_flatline, stuck_value, noise_burst };

inline std::string to_string(FaultKind kind) {
    switch (kind) {
        case FaultKind::disconnect_flatline: return "disconnect_flatline";
        case FaultKind::stuck_value: return "stuck_value";
        case FaultKind::noise_burst: return "noise_burst";
    }
    throw std::invalid_argument("unknown fault kind");
}

inline FaultKind fault_kind_from_string(const std::string& s) {
    if (s == "disconnect_flatline" || s == "flatline") {
        return FaultKind::disconnect_flatline;
    }
    if (s == "stuck_value" || s == "stuck") {
        return FaultKind::stuck_value;
    }
    if (s == "noise_burst" || s == "noise") {
        return FaultKind::noise_burst;
    }
    throw std::invalid_argument("unknown fault kind: " + s);
}

/// Ground-truth fault annotation over [start, end) in sample indices.
struct FaultLabel {
    std::string sensor_id;
    std::size_t start = 0;
    std::size_t end = 0;
    FaultKind kind = FaultKind::disconnect_flatline;
    double stuck_level = 0.0;   // stuck_value only
    double noise_std = 0.0;     // noise_burst: channel's base noise level
    double noise_factor = 1.0;  // noise_burst: target multiplier of that level
    std::uint64_t seed = 0;     // noise_burst draw stream
};

struct NominalParams {
    double drive_amplitude = 1.0;
    double noise_std = 0.02;
    std::vector<double> offsets; // per channel; padded with 0 when short
    double dt = 0.01;            // seconds between samples
    std::size_t n_harmonics = 6;
    // harmonic frequencies in cycles over the whole run; the band keeps the
    // drive moving inside every correlation window while staying far below
    // the sampling rate
    double freq_min = 5.0;
    double freq_max = 40.0;
};

/// Synthetic co-driven channels: a shared smooth drive (sum of low-frequency
/// sinusoids with seeded random phases and frequencies) plus a per-channel
/// offset and independent Gaussian noise.
inline MeasurementMatrix generate_nominal(std::size_t n_sensors, std::size_t n_samples,
                                          std::uint64_t seed, const NominalParams& params = {}) {
    if (n_sensors < 2) {
        throw std::invalid_argument("need at least 2 sensors");
    }
    if (n_samples < 500) {
        throw std::invalid_argument("need at least 500 samples");
    }
    Rng rng(seed);
    std::vector<double> freq(params.n_harmonics);
    std::vector<double> phase(params.n_harmonics);
    for (std::size_t q = 0; q < params.n_harmonics; ++q) {
        freq[q] = rng.uniform(params.freq_min, params.freq_max);
        phase[q] = rng.uniform(0.0, 6.283185307179586);
    }
    std::vector<double> drive(n_samples, 0.0);
    const double harmonic_scale =
        params.n_harmonics > 0 ? 1.0 / std::sqrt(static_cast<double>(params.n_harmonics)) : 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n_samples);
        double v = 0.0;
        for (std::size_t q = 0; q < params.n_harmonics; ++q) {
            v += std::sin(6.283185307179586 * freq[q] * u + phase[q]);
        }
        drive[i] = params.drive_amplitude * harmonic_scale * v;
    }

    MeasurementMatrix m;
    m.timestamps.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        m.timestamps[i] = static_cast<double>(i) * params.dt;
    }
    for (std::size_t c = 0; c < n_sensors; ++c) {
        m.sensor_ids.push_back("c" + std::to_string(c + 1));
        const double offset = c < params.offsets.size() ? params.offsets[c] : 0.0;
        std::vector<double> channel(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) {
            channel[i] = drive[i] + offset + (params.noise_std > 0.0 ? rng.normal(0.0, params.noise_std) : 0.0);
        }
        m.values.push_back(std::move(channel));
    }
    validate_matrix(m);
    return m;
}

/// Applies one fault to a copy of the matrix. Samples outside [start, end) are
/// untouched. Flatline holds the last pre-fault value; stuck holds a given
/// constant; a noise burst adds Gaussian noise sized so the channel's noise
/// std becomes noise_std * noise_factor.
inline MeasurementMatrix inject_fault(const MeasurementMatrix& matrix, const FaultLabel& label) {
    validate_matrix(matrix);
    if (label.start >= label.end || label.end > matrix.n_samples()) {
        throw std::invalid_argument("fault interval [" + std::to_string(label.start) + ", " +
                                    std::to_string(label.end) + ") is invalid for " +
                                    std::to_string(matrix.n_samples()) + " samples");
    }
    if (!matrix.has_sensor(label.sensor_id)) {
        throw std::invalid_argument("fault references unknown sensor " + label.sensor_id);
    }
    MeasurementMatrix out = matrix;
    std::size_t row = 0;
    while (out.sensor_ids[row] != label.sensor_id) {
        ++row;
    }
    std::vector<double>& channel = out.values[row];
    switch (label.kind) {
        case FaultKind::disconnect_flatline: {
            const double held = channel[label.start > 0 ? label.start - 1 : 0];
            std::fill(channel.begin() + static_cast<std::ptrdiff_t>(label.start),
                      channel.begin() + static_cast<std::ptrdiff_t>(label.end), held);
            break;
        }
        case FaultKind::stuck_value: {
            std::fill(channel.begin() + static_cast<std::ptrdiff_t>(label.start),
                      channel.begin() + static_cast<std::ptrdiff_t>(label.end), label.stuck_level);
            break;
        }
        case FaultKind::noise_burst: {
            if (label.noise_factor < 1.0 || label.noise_std < 0.0) {
                throw std::invalid_argument("noise burst needs noise_factor >= 1 and noise_std >= 0");
            }
            const double extra =
                label.noise_std * std::sqrt(label.noise_factor * label.noise_factor - 1.0);
            Rng rng(label.seed);
            for (std::size_t i = label.start; i < label.end; ++i) {
                channel[i] += rng.normal(0.0, extra);
            }
            break;
        }
    }
    return out;
}

/// Per-time-step detection counts pooled over all pairwise traces.
struct EvalReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 1.0;
    double recall = 1.0;
};

/// A trace step is ground-truth positive iff either sensor of its pair lies
/// inside a fault interval extended by `grace` samples at onset and offset.
/// Precision and recall default to 1 when their denominator is zero.
inline EvalReport precision_recall(const std::vector<AlarmTrace>& traces,
                                   const std::vector<FaultLabel>& labels, std::size_t grace) {
    for (const auto& label : labels) {
        if (label.start >= label.end) {
            throw std::invalid_argument("fault label interval is empty");
        }
    }
    for (const auto& trace : traces) {
        if (trace.alarms.size() != trace.sample_indices.size() ||
            trace.residuals.size() != trace.sample_indices.size()) {
            throw std::invalid_argument("trace sequences have mismatched lengths");
        }
        if (trace.sample_indices != traces.front().sample_indices) {
            throw std::invalid_argument("traces do not share one timeline");
        }
    }

    EvalReport report;
    for (const auto& trace : traces) {
        for (std::size_t t = 0; t < trace.sample_indices.size(); ++t) {
            const std::size_t idx = trace.sample_indices[t];
            bool positive = false;
            for (const auto& label : labels) {
                if (label.sensor_id != trace.pair.first && label.sensor_id != trace.pair.second) {
                    continue;
                }
                const std::size_t lo = label.start > grace ? label.start - grace : 0;
                const std::size_t hi = label.end + grace;
                if (idx >= lo && idx < hi) {
                    positive = true;
                    break;
                }
            }
            const bool alarmed = trace.alarms[t];
            if (alarmed && positive) {
                ++report.tp;
            } else if (alarmed && !positive) {
                ++report.fp;
            } else if (!alarmed && positive) {
                ++report.fn;
            }
        }
    }
    report.precision = (report.tp + report.fp) > 0
                           ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp)
                           : 1.0;
    report.recall = (report.tp + report.fn) > 0
                        ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn)
                        : 1.0;
    return report;
}

inline void to_json(nlohmann::json& j, const FaultLabel& label) {
    j = nlohmann::json{{"sensor", label.sensor_id},
                       {"start", label.start},
                       {"end", label.end},
                       {"kind", to_string(label.kind)}};
    if (label.kind == FaultKind::stuck_value) {
        j["stuck_level"] = label.stuck_level;
    }
    if (label.kind == FaultKind::noise_burst) {
        j["noise_std"] = label.noise_std;
        j["noise_factor"] = label.noise_factor;
        j["seed"] = label.seed;
    }
}

inline void from_json(const nlohmann::json& j, FaultLabel& label) {
    label.sensor_id = j.at("sensor").get<std::string>();
    label.start = j.at("start").get<std::size_t>();
    label.end = j.at("end").get<std::size_t>();
    label.kind = fault_kind_from_string(j.at("kind").get<std::string>());
    label.stuck_level = j.value("stuck_level", 0.0);
    label.noise_std = j.value("noise_std", 0.0);
    label.noise_factor = j.value("noise_factor", 1.0);
    label.seed = j.value("seed", std::uint64_t{0});
}

inline void to_json(nlohmann::json& j, const EvalReport& report) {
    j = nlohmann::json{{"tp", report.tp},
                       {"fp", report.fp},
                       {"fn", report.fn},
                       {"precision", report.precision},
                       {"recall", report.recall}};
}

}  // namespace fddkit
