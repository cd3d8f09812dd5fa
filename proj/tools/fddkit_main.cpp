// Command-line front end: simulate, train, monitor, evaluate.
//
// Exit codes: 0 success (monitor: no fault detected), 1 I/O or internal
// error, 2 configuration/validation error, 3 fault detected by monitor.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fddkit/csv.hpp"
#include "fddkit/pipeline.hpp"
#include "fddkit/simeval.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFault = 3;

fddkit::FaultLabel parse_fault_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream stream(spec);
    while (std::getline(stream, token, ':')) {
        parts.push_back(token);
    }
    if (parts.size() < 4 || parts.size() > 5) {
        throw std::invalid_argument("fault spec must be sensor:start:end:kind[:value], got '" + spec +
                                    "'");
    }
    fddkit::FaultLabel label;
    label.sensor_id = parts[0];
    label.start = static_cast<std::size_t>(std::stoull(parts[1]));
    label.end = static_cast<std::size_t>(std::stoull(parts[2]));
    label.kind = fddkit::fault_kind_from_string(parts[3]);
    if (parts.size() == 5) {
        if (label.kind == fddkit::FaultKind::stuck_value) {
            label.stuck_level = std::stod(parts[4]);
        } else if (label.kind == fddkit::FaultKind::noise_burst) {
            label.noise_factor = std::stod(parts[4]);
        }
    }
    return label;
}

struct ConfigOverrides {
    std::optional<double> kappa;
    std::optional<std::size_t> k, s, w;
    std::optional<std::string> model_type;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grace, median_kernel;
    std::optional<std::size_t> epochs, n_hidden, batch_size, cd_steps;
    std::optional<double> learning_rate;
    std::optional<std::size_t> n_components, max_iters;
    std::optional<double> holdout_fraction;
};

fddkit::PipelineConfig effective_config(const std::string& config_path, const ConfigOverrides& o) {
    fddkit::PipelineConfig config;
    if (!config_path.empty()) {
        config = fddkit::read_json_file(config_path).get<fddkit::PipelineConfig>();
    }
    if (o.kappa) config.kappa = *o.kappa;
    if (o.k) config.k = *o.k;
    if (o.s) config.s = *o.s;
    if (o.w) config.w = *o.w;
    if (o.model_type) config.model_type = fddkit::model_type_from_string(*o.model_type);
    if (o.seed) config.seed = *o.seed;
    if (o.grace) config.grace = *o.grace;
    if (o.median_kernel) config.median_kernel = *o.median_kernel;
    if (o.epochs) config.rbm.epochs = *o.epochs;
    if (o.n_hidden) config.rbm.n_hidden = *o.n_hidden;
    if (o.batch_size) config.rbm.batch_size = *o.batch_size;
    if (o.cd_steps) config.rbm.cd_steps = *o.cd_steps;
    if (o.learning_rate) config.rbm.learning_rate = *o.learning_rate;
    if (o.n_components) config.gmm.n_components = *o.n_components;
    if (o.max_iters) config.gmm.max_iters = *o.max_iters;
    if (o.holdout_fraction) config.holdout_fraction = *o.holdout_fraction;
    fddkit::validate_pipeline_config(config);
    return config;
}

int run_simulate(const std::string& out_path, const std::string& labels_path, std::size_t sensors,
                 std::size_t samples, std::uint64_t seed, double amplitude, double noise, double dt,
                 const std::vector<double>& offsets, const std::vector<std::string>& fault_specs) {
    fddkit::NominalParams params;
    params.drive_amplitude = amplitude;
    params.noise_std = noise;
    params.dt = dt;
    params.offsets = offsets;
    fddkit::MeasurementMatrix matrix = fddkit::generate_nominal(sensors, samples, seed, params);

    std::vector<fddkit::FaultLabel> labels;
    for (const auto& spec : fault_specs) {
        fddkit::FaultLabel label = parse_fault_spec(spec);
        if (label.kind == fddkit::FaultKind::noise_burst) {
            label.noise_std = noise;
            label.seed = seed ^ 0x9e3779b97f4a7c15ull;
        }
        matrix = fddkit::inject_fault(matrix, label);
        labels.push_back(label);
    }
    fddkit::write_csv(matrix, out_path);
    std::cout << "wrote " << out_path << " (" << sensors << " sensors, " << samples
              << " samples, seed " << seed << ")\n";
    if (!labels_path.empty()) {
        fddkit::write_json_file(nlohmann::json{{"labels", labels}}, labels_path);
        std::cout << "wrote " << labels_path << " (" << labels.size() << " labels)\n";
    }
    return kExitOk;
}

int run_train(const std::string& data_path, const std::string& out_dir, const std::string& config_path,
              const ConfigOverrides& overrides) {
    const fddkit::PipelineConfig config = effective_config(config_path, overrides);
    std::cout << "effective config: " << nlohmann::json(config).dump() << "\n";
    const fddkit::MeasurementMatrix matrix = fddkit::load_csv(data_path);
    const fddkit::ModelBundle bundle = fddkit::train_bundle(matrix, config);
    if (bundle.models.empty()) {
        std::cerr << "no correlated pairs found at kappa=" << config.kappa << "\n";
        return kExitConfig;
    }
    fddkit::write_bundle(bundle, out_dir);
    std::cout << "trained " << bundle.models.size() << " pair models into " << out_dir << "\n";
    for (const auto& pm : bundle.models) {
        std::cout << "  " << pm.pair.first << "," << pm.pair.second << "  mu=" << pm.mu
                  << " sigma=" << pm.sigma << " delta=" << pm.delta << "\n";
    }
    return kExitOk;
}

int run_monitor(const std::string& data_path, const std::string& models_dir, const std::string& out_dir,
                std::size_t max_cardinality, std::optional<std::size_t> snapshot,
                const std::string& between) {
    const fddkit::ModelBundle bundle = fddkit::load_bundle(models_dir);
    const fddkit::MeasurementMatrix matrix = fddkit::load_csv(data_path);
    for (const auto& pm : bundle.models) {
        if (!matrix.has_sensor(pm.pair.first) || !matrix.has_sensor(pm.pair.second)) {
            std::cerr << "model pair (" << pm.pair.first << "," << pm.pair.second
                      << ") references a sensor missing from " << data_path << "\n";
            return kExitConfig;
        }
    }
    fddkit::MonitorSettings settings;
    settings.median_kernel = bundle.config.median_kernel;
    const std::vector<fddkit::AlarmTrace> traces = fddkit::run_monitor(bundle.models, matrix, settings);

    std::filesystem::create_directories(out_dir);
    std::size_t total_alarms = 0;
    for (const auto& trace : traces) {
        fddkit::write_trace_csv(trace, std::filesystem::path(out_dir) / fddkit::trace_filename(trace.pair));
        for (bool a : trace.alarms) {
            total_alarms += a ? 1 : 0;
        }
    }

    std::vector<fddkit::SensorPair> alarmed;
    nlohmann::json time_json;
    if (snapshot) {
        alarmed = fddkit::alarmed_pairs_at(traces, *snapshot);
        time_json = *snapshot;
    } else if (!between.empty()) {
        const auto colon = between.find(':');
        if (colon == std::string::npos) {
            std::cerr << "--between expects LO:HI sample indices\n";
            return kExitConfig;
        }
        const auto lo = static_cast<std::size_t>(std::stoull(between.substr(0, colon)));
        const auto hi = static_cast<std::size_t>(std::stoull(between.substr(colon + 1)));
        alarmed = fddkit::alarmed_pairs_between(traces, lo, hi);
        time_json = nlohmann::json::array({lo, hi});
    } else {
        std::size_t hi = 0;
        for (const auto& trace : traces) {
            if (!trace.sample_indices.empty()) {
                hi = std::max(hi, trace.sample_indices.back() + 1);
            }
        }
        alarmed = fddkit::alarmed_pairs_between(traces, 0, hi);
        time_json = nlohmann::json::array({0, hi});
    }
    const nlohmann::json diagnosis = fddkit::diagnosis_json(alarmed, max_cardinality, time_json);
    fddkit::write_json_file(diagnosis, std::filesystem::path(out_dir) / "diagnosis.json");
    fddkit::write_json_file(nlohmann::json{{"config", bundle.config}, {"data", data_path}},
                            std::filesystem::path(out_dir) / "monitor_meta.json");

    std::cout << "effective config: " << nlohmann::json(bundle.config).dump() << "\n";
    std::cout << "monitored " << traces.size() << " pairs, " << total_alarms << " alarm steps\n";
    std::cout << "diagnoses: " << diagnosis.at("diagnoses").dump() << "\n";
    return total_alarms > 0 ? kExitFault : kExitOk;
}

int run_evaluate(const std::string& traces_dir, const std::string& labels_path,
                 const std::string& data_path, std::optional<std::size_t> grace,
                 const std::string& out_path) {
    const fddkit::MeasurementMatrix matrix = fddkit::load_csv(data_path);
    std::vector<fddkit::AlarmTrace> traces;
    for (const auto& entry : std::filesystem::directory_iterator(traces_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("residuals_", 0) == 0 && entry.path().extension() == ".csv") {
            traces.push_back(fddkit::load_trace_csv(entry.path(), matrix.timestamps));
        }
    }
    std::sort(traces.begin(), traces.end(), [](const auto& a, const auto& b) { return a.pair < b.pair; });
    const nlohmann::json labels_json = fddkit::read_json_file(labels_path);
    const auto labels = labels_json.at("labels").get<std::vector<fddkit::FaultLabel>>();

    std::size_t effective_grace;
    if (grace) {
        effective_grace = *grace;
    } else {
        // default: the monitoring run's effective grace (grace or k)
        const auto meta_path = std::filesystem::path(traces_dir) / "monitor_meta.json";
        if (std::filesystem::exists(meta_path)) {
            const auto config =
                fddkit::read_json_file(meta_path).at("config").get<fddkit::PipelineConfig>();
            effective_grace = config.effective_grace();
        } else {
            effective_grace = fddkit::PipelineConfig{}.effective_grace();
        }
    }
    const fddkit::EvalReport report = fddkit::precision_recall(traces, labels, effective_grace);
    const nlohmann::json report_json(report);
    std::cout << report_json.dump(2) << "\n";
    if (!out_path.empty()) {
        fddkit::write_json_file(report_json, out_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation-model fault detection and diagnosis toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate synthetic multi-channel data");
    std::string sim_out, sim_labels;
    std::size_t sim_sensors = 4, sim_samples = 12000;
    std::uint64_t sim_seed = 42;
    double sim_amplitude = 1.0, sim_noise = 0.02, sim_dt = 0.01;
    std::vector<double> sim_offsets;
    std::vector<std::string> sim_faults;
    sim->add_option("--out", sim_out, "Output CSV path")->required();
    sim->add_option("--labels-out", sim_labels, "Fault label JSON path");
    sim->add_option("--sensors", sim_sensors, "Number of channels");
    sim->add_option("--samples", sim_samples, "Number of samples");
    sim->add_option("--seed", sim_seed, "Random seed");
    sim->add_option("--amplitude", sim_amplitude, "Shared drive amplitude");
    sim->add_option("--noise", sim_noise, "Per-channel noise stddev");
    sim->add_option("--dt", sim_dt, "Sample period in seconds");
    sim->add_option("--offsets", sim_offsets, "Per-channel offsets")->delimiter(',');
    sim->add_option("--fault", sim_faults,
                    "Fault spec sensor:start:end:kind[:value]; kinds: flatline, stuck, noise");

    // shared train/config flags
    auto* train = app.add_subcommand("train", "Discover correlated pairs and train pair models");
    std::string train_data, train_out, train_config;
    ConfigOverrides ov;
    double ov_kappa = 0, ov_lr = 0, ov_holdout = 0;
    std::size_t ov_k = 0, ov_s = 0, ov_w = 0, ov_grace = 0, ov_kernel = 0, ov_epochs = 0,
                ov_hidden = 0, ov_batch = 0, ov_cd = 0, ov_components = 0, ov_iters = 0;
    std::uint64_t ov_seed = 0;
    std::string ov_model;
    train->add_option("--data", train_data, "Training CSV")->required();
    train->add_option("--out", train_out, "Output model directory")->required();
    train->add_option("--config", train_config, "Pipeline config JSON");
    auto* f_kappa = train->add_option("--kappa", ov_kappa, "Correlation threshold");
    auto* f_k = train->add_option("--k", ov_k, "Correlation window size");
    auto* f_s = train->add_option("--s", ov_s, "Model input window size");
    auto* f_w = train->add_option("--w", ov_w, "Threshold stddev multiplier");
    auto* f_model = train->add_option("--model-type", ov_model, "rbm or gmm");
    auto* f_seed = train->add_option("--seed", ov_seed, "Random seed");
    auto* f_tr_grace = train->add_option("--grace", ov_grace, "Evaluation grace (defaults to k)");
    auto* f_kernel = train->add_option("--median-kernel", ov_kernel, "Median filter kernel");
    auto* f_epochs = train->add_option("--epochs", ov_epochs, "RBM training epochs");
    auto* f_hidden = train->add_option("--n-hidden", ov_hidden, "RBM hidden units");
    auto* f_batch = train->add_option("--batch-size", ov_batch, "RBM batch size");
    auto* f_cd = train->add_option("--cd-steps", ov_cd, "Contrastive divergence steps");
    auto* f_lr = train->add_option("--learning-rate", ov_lr, "RBM learning rate");
    auto* f_components = train->add_option("--n-components", ov_components, "GMM components");
    auto* f_iters = train->add_option("--max-iters", ov_iters, "GMM EM iteration cap");
    auto* f_holdout = train->add_option("--holdout-fraction", ov_holdout,
                                        "Calibrate on this trailing fraction instead of the training windows");

    // monitor
    auto* mon = app.add_subcommand("monitor", "Run residual monitoring and diagnosis");
    std::string mon_data, mon_models, mon_out, mon_between;
    std::size_t mon_cardinality = 2;
    std::size_t mon_at = 0;
    mon->add_option("--data", mon_data, "Monitoring CSV")->required();
    mon->add_option("--models", mon_models, "Model bundle directory")->required();
    mon->add_option("--out", mon_out, "Output directory")->required();
    mon->add_option("--max-cardinality", mon_cardinality, "Diagnosis cardinality bound");
    auto* f_at = mon->add_option("--at", mon_at, "Diagnose the alarm state at this sample index");
    mon->add_option("--between", mon_between,
                    "Diagnose the union of alarms over sample indices LO:HI (default: whole run)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score traces against fault labels");
    std::string eval_traces, eval_labels, eval_data, eval_out;
    std::size_t eval_grace = 0;
    eval->add_option("--traces", eval_traces, "Directory of residual CSVs")->required();
    eval->add_option("--labels", eval_labels, "Fault label JSON")->required();
    eval->add_option("--data", eval_data, "Reference data CSV (for the timeline)")->required();
    auto* f_grace = eval->add_option("--grace", eval_grace, "Grace samples around fault intervals");
    eval->add_option("--out", eval_out, "Write the report JSON here as well");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return run_simulate(sim_out, sim_labels, sim_sensors, sim_samples, sim_seed, sim_amplitude,
                                sim_noise, sim_dt, sim_offsets, sim_faults);
        }
        if (train->parsed()) {
            if (*f_kappa) ov.kappa = ov_kappa;
            if (*f_k) ov.k = ov_k;
            if (*f_s) ov.s = ov_s;
            if (*f_w) ov.w = ov_w;
            if (*f_model) ov.model_type = ov_model;
            if (*f_seed) ov.seed = ov_seed;
            if (*f_tr_grace) ov.grace = ov_grace;
            if (*f_kernel) ov.median_kernel = ov_kernel;
            if (*f_epochs) ov.epochs = ov_epochs;
            if (*f_hidden) ov.n_hidden = ov_hidden;
            if (*f_batch) ov.batch_size = ov_batch;
            if (*f_cd) ov.cd_steps = ov_cd;
            if (*f_lr) ov.learning_rate = ov_lr;
            if (*f_components) ov.n_components = ov_components;
            if (*f_iters) ov.max_iters = ov_iters;
            if (*f_holdout) ov.holdout_fraction = ov_holdout;
            return run_train(train_data, train_out, train_config, ov);
        }
        if (mon->parsed()) {
            std::optional<std::size_t> snapshot;
            if (*f_at) {
                snapshot = mon_at;
            }
            return run_monitor(mon_data, mon_models, mon_out, mon_cardinality, snapshot, mon_between);
        }
        if (eval->parsed()) {
            std::optional<std::size_t> grace;
            if (*f_grace) {
                grace = eval_grace;
            }
            return run_evaluate(eval_traces, eval_labels, eval_data, grace, eval_out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitOk;
}
