#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fddkit/csv.hpp"
#include "fddkit/diagnose.hpp"
#include "fddkit/gmm.hpp"
#include "fddkit/monitor.hpp"
#include "fddkit/rbm.hpp"
#include "fddkit/signal.hpp"

namespace fddkit {

enum class ModelType { rbm, gmm };

inline std::string to_string(ModelType t) { return t == ModelType::rbm ? "rbm" : "gmm"; }

inline ModelType model_type_from_string(const std::string& s) {
    if (s == "rbm") {
        return ModelType::rbm;
    }
    if (s == "gmm") {
        return ModelType::gmm;
    }
    throw std::invalid_argument("model_type must be 'rbm' or 'gmm', got '" + s + "'");
}

struct RbmOptions {
    std::size_t n_hidden = 20;
    std::size_t epochs = 30;
    double learning_rate = 0.05;
    std::size_t batch_size = 10;
    std::size_t cd_steps = 1;
};

struct GmmOptions {
    std::size_t n_components = 5;
    std::size_t max_iters = 200;
    double tol = 1e-7;
};

/// Full pipeline configuration; defaults reproduce the reference experiment
/// (kappa 0.5, k 100, s 10, 20 hidden units, 30 epochs, w 3, 5 mixture
/// components). Unset grace falls back to k.
struct PipelineConfig {
    double kappa = 0.5;
    std::size_t k = 100;
    std::size_t s = 10;
    ModelType model_type = ModelType::rbm;
    RbmOptions rbm;
    GmmOptions gmm;
    std::size_t w = 3;
    std::size_t median_kernel = 5;
    std::uint64_t seed = 42;
    std::optional<std::size_t> grace;
    double holdout_fraction = 0.0; // 0 calibrates on the training windows themselves

    std::size_t effective_grace() const { return grace.value_or(k); }
};

inline void validate_pipeline_config(const PipelineConfig& c) {
    if (c.kappa < 0.0 || c.kappa >= 1.0) {
        throw std::invalid_argument("kappa must lie in [0, 1)");
    }
    if (c.k < 2 || c.s < 1 || c.w < 1) {
        throw std::invalid_argument("k must be >= 2 and s, w >= 1");
    }
    if (c.median_kernel < 1 || c.median_kernel % 2 == 0) {
        throw std::invalid_argument("median_kernel must be odd and positive");
    }
    if (c.rbm.n_hidden < 1 || c.rbm.epochs < 1 || c.rbm.batch_size < 1 || c.rbm.cd_steps < 1 ||
        !(c.rbm.learning_rate > 0.0)) {
        throw std::invalid_argument("rbm options must be positive");
    }
    if (c.gmm.n_components < 1 || c.gmm.max_iters < 1 || !(c.gmm.tol > 0.0)) {
        throw std::invalid_argument("gmm options must be positive");
    }
    if (c.holdout_fraction < 0.0 || c.holdout_fraction > 0.9) {
        throw std::invalid_argument("holdout_fraction must lie in [0, 0.9]");
    }
}

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = nlohmann::json{
        {"kappa", c.kappa},
        {"k", c.k},
        {"s", c.s},
        {"model_type", to_string(c.model_type)},
        {"rbm",
         {{"n_hidden", c.rbm.n_hidden},
          {"epochs", c.rbm.epochs},
          {"learning_rate", c.rbm.learning_rate},
          {"batch_size", c.rbm.batch_size},
          {"cd_steps", c.rbm.cd_steps}}},
        {"gmm",
         {{"n_components", c.gmm.n_components},
          {"max_iters", c.gmm.max_iters},
          {"tol", c.gmm.tol}}},
        {"w", c.w},
        {"median_kernel", c.median_kernel},
        {"seed", c.seed},
        {"grace", c.effective_grace()},
        {"holdout_fraction", c.holdout_fraction}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    c.kappa = j.value("kappa", c.kappa);
    c.k = j.value("k", c.k);
    c.s = j.value("s", c.s);
    if (j.contains("model_type")) {
        c.model_type = model_type_from_string(j.at("model_type").get<std::string>());
    }
    if (j.contains("rbm")) {
        const auto& r = j.at("rbm");
        c.rbm.n_hidden = r.value("n_hidden", c.rbm.n_hidden);
        c.rbm.epochs = r.value("epochs", c.rbm.epochs);
        c.rbm.learning_rate = r.value("learning_rate", c.rbm.learning_rate);
        c.rbm.batch_size = r.value("batch_size", c.rbm.batch_size);
        c.rbm.cd_steps = r.value("cd_steps", c.rbm.cd_steps);
    }
    if (j.contains("gmm")) {
        const auto& g = j.at("gmm");
        c.gmm.n_components = g.value("n_components", c.gmm.n_components);
        c.gmm.max_iters = g.value("max_iters", c.gmm.max_iters);
        c.gmm.tol = g.value("tol", c.gmm.tol);
    }
    c.w = j.value("w", c.w);
    c.median_kernel = j.value("median_kernel", c.median_kernel);
    c.seed = j.value("seed", c.seed);
    if (j.contains("grace") && !j.at("grace").is_null()) {
        c.grace = j.at("grace").get<std::size_t>();
    }
    c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
    validate_pipeline_config(c);
}

struct ModelBundle {
    std::vector<PairModel> models;
    PipelineConfig config;
};

/// Discovers correlated pairs on median-filtered channels and trains one
/// calibrated PairModel per pair. Each pair trains from its own random stream,
/// derived as seed xor pair-index.
inline ModelBundle train_bundle(const MeasurementMatrix& matrix, const PipelineConfig& config) {
    validate_pipeline_config(config);
    validate_matrix(matrix);

    MeasurementMatrix filtered = matrix;
    for (auto& channel : filtered.values) {
        channel = median_filter(channel, config.median_kernel);
    }

    ModelBundle bundle;
    bundle.config = config;
    const std::vector<SensorPair> pairs = find_correlated_pairs(filtered, config.kappa);
    const NormalizationRange input_range{-1.0, 1.0};

    for (std::size_t pair_index = 0; pair_index < pairs.size(); ++pair_index) {
        const SensorPair& pair = pairs[pair_index];
        const CorrelationSeries corr =
            sliding_correlations(filtered.channel(pair.first), filtered.channel(pair.second), config.k);
        const auto raw_windows = window_stack(corr, config.s);

        std::size_t n_train = raw_windows.size();
        if (config.holdout_fraction > 0.0) {
            n_train = static_cast<std::size_t>(
                std::ceil((1.0 - config.holdout_fraction) * static_cast<double>(raw_windows.size())));
            n_train = std::max<std::size_t>(n_train, 1);
        }
        std::vector<std::vector<double>> train_inputs;
        train_inputs.reserve(n_train);
        for (std::size_t i = 0; i < n_train; ++i) {
            train_inputs.push_back(normalize(raw_windows[i], input_range));
        }

        PairModel pm;
        pm.pair = pair;
        pm.input_range = input_range;
        pm.w = config.w;
        pm.k = config.k;
        pm.s = config.s;
        const std::uint64_t pair_seed = config.seed ^ static_cast<std::uint64_t>(pair_index);
        if (config.model_type == ModelType::rbm) {
            TrainConfig tc;
            tc.epochs = config.rbm.epochs;
            tc.learning_rate = config.rbm.learning_rate;
            tc.cd_steps = config.rbm.cd_steps;
            tc.batch_size = config.rbm.batch_size;
            tc.seed = pair_seed;
            pm.model = train_rbm(train_inputs, config.rbm.n_hidden, tc);
        } else {
            pm.model = fit_em(train_inputs, config.gmm.n_components, pair_seed, config.gmm.max_iters,
                              config.gmm.tol);
        }

        const std::size_t calib_begin = config.holdout_fraction > 0.0 ? n_train : 0;
        std::vector<double> train_residuals;
        train_residuals.reserve(raw_windows.size() - calib_begin);
        for (std::size_t i = calib_begin; i < raw_windows.size(); ++i) {
            train_residuals.push_back(residual(pm, raw_windows[i]));
        }
        const Calibration cal = calibrate(train_residuals, config.w);
        pm.mu = cal.mu;
        pm.sigma = cal.sigma;
        pm.delta = cal.delta;
        bundle.models.push_back(std::move(pm));
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// Bundle persistence
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const PairModel& pm) {
    nlohmann::json model_json;
    if (const Rbm* rbm = std::get_if<Rbm>(&pm.model)) {
        model_json = *rbm;
    } else {
        model_json = std::get<Gmm>(pm.model);
    }
    j = nlohmann::json{{"format_version", 1},
                       {"pair", {pm.pair.first, pm.pair.second}},
                       {"input_range", {{"lo", pm.input_range.lo}, {"hi", pm.input_range.hi}}},
                       {"mu", pm.mu},
                       {"sigma", pm.sigma},
                       {"delta", pm.delta},
                       {"w", pm.w},
                       {"k", pm.k},
                       {"s", pm.s},
                       {"model", model_json}};
}

inline void from_json(const nlohmann::json& j, PairModel& pm) {
    pm.pair.first = j.at("pair").at(0).get<std::string>();
    pm.pair.second = j.at("pair").at(1).get<std::string>();
    pm.input_range.lo = j.at("input_range").at("lo").get<double>();
    pm.input_range.hi = j.at("input_range").at("hi").get<double>();
    pm.mu = j.at("mu").get<double>();
    pm.sigma = j.at("sigma").get<double>();
    pm.delta = j.at("delta").get<double>();
    pm.w = j.at("w").get<std::size_t>();
    pm.k = j.at("k").get<std::size_t>();
    pm.s = j.at("s").get<std::size_t>();
    const auto& model_json = j.at("model");
    const std::string type = model_json.at("type").get<std::string>();
    if (type == "rbm") {
        pm.model = model_json.get<Rbm>();
    } else if (type == "gmm") {
        pm.model = model_json.get<Gmm>();
    } else {
        throw std::invalid_argument("unknown model type '" + type + "'");
    }
}

inline std::string pair_model_filename(const SensorPair& pair) {
    return "model_" + pair.first + "_" + pair.second + ".json";
}

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    nlohmann::json j;
    in >> j;
    return j;
}

/// Writes one model JSON per pair plus manifest.json into out_dir.
inline void write_bundle(const ModelBundle& bundle, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& pm : bundle.models) {
        const std::string filename = pair_model_filename(pm.pair);
        write_json_file(nlohmann::json(pm), out_dir / filename);
        pairs.push_back({{"sensors", {pm.pair.first, pm.pair.second}}, {"file", filename}});
    }
    nlohmann::json manifest{{"format_version", 1},
                            {"model_type", to_string(bundle.config.model_type)},
                            {"seed", bundle.config.seed},
                            {"pairs", pairs},
                            {"config", bundle.config}};
    write_json_file(manifest, out_dir / "manifest.json");
}

inline ModelBundle load_bundle(const std::filesystem::path& dir) {
    const nlohmann::json manifest = read_json_file(dir / "manifest.json");
    ModelBundle bundle;
    bundle.config = manifest.at("config").get<PipelineConfig>();
    for (const auto& entry : manifest.at("pairs")) {
        const auto model_json = read_json_file(dir / entry.at("file").get<std::string>());
        bundle.models.push_back(model_json.get<PairModel>());
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// Trace persistence
// ---------------------------------------------------------------------------

inline std::string trace_filename(const SensorPair& pair) {
    return "residuals_" + pair.first + "_" + pair.second + ".csv";
}

inline void write_trace_csv(const AlarmTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "timestamp,sensor_a,sensor_b,residual,threshold,alarm\n";
    for (std::size_t t = 0; t < trace.residuals.size(); ++t) {
        out << format_double(trace.timestamps[t]) << ',' << trace.pair.first << ','
            << trace.pair.second << ',' << format_double(trace.residuals[t]) << ','
            << format_double(trace.threshold) << ',' << (trace.alarms[t] ? 1 : 0) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

/// Reads a residual CSV back; sample indices are recovered by exact timestamp
/// lookup in the reference timeline.
inline AlarmTrace load_trace_csv(const std::filesystem::path& path,
                                 const std::vector<double>& timeline) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) ||
        strip_crlf(line) != "timestamp,sensor_a,sensor_b,residual,threshold,alarm") {
        throw std::runtime_error(path.string() + ": unexpected residual CSV header");
    }
    AlarmTrace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = strip_crlf(line);
        if (stripped.empty()) {
            continue;
        }
        auto fields = split_csv_line(stripped);
        if (fields.size() != 6) {
            throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                                     " has " + std::to_string(fields.size()) + " fields, expected 6");
        }
        const double ts = parse_double(fields[0], line_no, 1);
        if (trace.residuals.empty()) {
            trace.pair = {fields[1], fields[2]};
        }
        const auto it = std::lower_bound(timeline.begin(), timeline.end(), ts);
        if (it == timeline.end() || *it != ts) {
            throw std::invalid_argument(path.string() + ": timestamp " + fields[0] +
                                        " not present in the reference timeline");
        }
        trace.timestamps.push_back(ts);
        trace.sample_indices.push_back(static_cast<std::size_t>(it - timeline.begin()));
        trace.residuals.push_back(parse_double(fields[3], line_no, 4));
        trace.threshold = parse_double(fields[4], line_no, 5);
        const std::string alarm = fields[5];
        if (alarm != "0" && alarm != "1") {
            throw std::runtime_error(path.string() + ": alarm column must be 0 or 1 at line " +
                                     std::to_string(line_no));
        }
        trace.alarms.push_back(alarm == "1");
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Diagnosis over traces
// ---------------------------------------------------------------------------

/// Pairs alarmed at the latest trace step at or before the given sample index.
inline std::vector<SensorPair> alarmed_pairs_at(const std::vector<AlarmTrace>& traces,
                                                std::size_t sample_index) {
    std::vector<SensorPair> alarmed;
    for (const auto& trace : traces) {
        if (trace.sample_indices.empty() || trace.sample_indices.front() > sample_index) {
            throw std::invalid_argument("snapshot index precedes the first monitored sample");
        }
        auto it = std::upper_bound(trace.sample_indices.begin(), trace.sample_indices.end(),
                                   sample_index);
        const std::size_t step = static_cast<std::size_t>(it - trace.sample_indices.begin()) - 1;
        if (trace.alarms[step]) {
            alarmed.push_back(trace.pair);
        }
    }
    return alarmed;
}

/// Pairs with at least one alarm whose sample index lies in [lo, hi).
inline std::vector<SensorPair> alarmed_pairs_between(const std::vector<AlarmTrace>& traces,
                                                     std::size_t lo, std::size_t hi) {
    std::vector<SensorPair> alarmed;
    for (const auto& trace : traces) {
        for (std::size_t t = 0; t < trace.sample_indices.size(); ++t) {
            const std::size_t idx = trace.sample_indices[t];
            if (idx >= lo && idx < hi && trace.alarms[t]) {
                alarmed.push_back(trace.pair);
                break;
            }
        }
    }
    return alarmed;
}

/// Diagnosis artifact for one alarm state. With no conflicts the diagnosis
/// list is empty (nothing to explain).
inline nlohmann::json diagnosis_json(const std::vector<SensorPair>& alarmed,
                                     std::size_t max_cardinality, const nlohmann::json& time) {
    const std::vector<ConflictSet> conflicts = conflicts_at(alarmed);
    nlohmann::json diagnoses = nlohmann::json::array();
    if (!conflicts.empty()) {
        for (const auto& d : hs_dag(conflicts, max_cardinality)) {
            diagnoses.push_back(d);
        }
    }
    return nlohmann::json{{"time", time},
                          {"conflicts", conflicts},
                          {"diagnoses", diagnoses},
                          {"max_cardinality", max_cardinality}};
}

}  // namespace fddkit
