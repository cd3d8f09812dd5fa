#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fddkit/rng.hpp"

namespace fddkit {

/// Binary-unit Restricted Boltzmann Machine. Weights are row-major
/// n_hidden x n_visible; weight(i, j) connects hidden unit i to visible unit j.
struct Rbm {
    std::size_t n_visible = 0;
    std::size_t n_hidden = 0;
    std::vector<double> weights;
    std::vector<double> visible_bias;
    std::vector<double> hidden_bias;

    double weight(std::size_t i, std::size_t j) const { return weights[i * n_visible + j]; }
    double& weight(std::size_t i, std::size_t j) { return weights[i * n_visible + j]; }
};

struct TrainConfig {
    std::size_t epochs = 30;
    double learning_rate = 0.05;
    std::size_t cd_steps = 1;
    std::size_t batch_size = 10;
    std::uint64_t seed = 0;
};

inline void validate_train_config(const TrainConfig& c) {
    if (c.epochs < 1 || c.cd_steps < 1 || c.batch_size < 1 || !(c.learning_rate > 0.0)) {
        throw std::invalid_argument("train config fields must be positive");
    }
}

/// Numerically stable logistic function.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// p(h_i = 1 | v) for every hidden unit.
inline std::vector<double> hidden_probs(const Rbm& model, const std::vector<double>& v) {
    if (v.size() != model.n_visible) {
        throw std::invalid_argument("visible vector dimension mismatch");
    }
    std::vector<double> h(model.n_hidden);
    for (std::size_t i = 0; i < model.n_hidden; ++i) {
        double activation = model.hidden_bias[i];
        for (std::size_t j = 0; j < model.n_visible; ++j) {
            activation += model.weight(i, j) * v[j];
        }
        h[i] = sigmoid(activation);
    }
    return h;
}

/// p(v_j = 1 | h) for every visible unit.
inline std::vector<double> visible_probs(const Rbm& model, const std::vector<double>& h) {
    if (h.size() != model.n_hidden) {
        throw std::invalid_argument("hidden vector dimension mismatch");
    }
    std::vector<double> v(model.n_visible);
    for (std::size_t j = 0; j < model.n_visible; ++j) {
        double activation = model.visible_bias[j];
        for (std::size_t i = 0; i < model.n_hidden; ++i) {
            activation += model.weight(i, j) * h[i];
        }
        v[j] = sigmoid(activation);
    }
    return v;
}

/// E(v, h); exponentiated and normalized it defines the model's Gibbs
/// distribution. Used by the exhaustive small-model tests.
inline double energy(const Rbm& model, const std::vector<double>& v, const std::vector<double>& h) {
    if (v.size() != model.n_visible || h.size() != model.n_hidden) {
        throw std::invalid_argument("energy dimension mismatch");
    }
    double e = 0.0;
    for (std::size_t i = 0; i < model.n_hidden; ++i) {
        for (std::size_t j = 0; j < model.n_visible; ++j) {
            e -= model.weight(i, j) * h[i] * v[j];
        }
    }
    for (std::size_t j = 0; j < model.n_visible; ++j) {
        e -= model.visible_bias[j] * v[j];
    }
    for (std::size_t i = 0; i < model.n_hidden; ++i) {
        e -= model.hidden_bias[i] * h[i];
    }
    return e;
}

inline void check_visible_batch(const Rbm& model, const std::vector<std::vector<double>>& batch) {
    if (batch.empty()) {
        throw std::invalid_argument("batch must be non-empty");
    }
    for (const auto& v : batch) {
        if (v.size() != model.n_visible) {
            throw std::invalid_argument("batch vector dimension mismatch");
        }
        for (double x : v) {
            if (x < 0.0 || x > 1.0 || !std::isfinite(x)) {
                throw std::invalid_argument("visible values must lie in [0, 1]");
            }
        }
    }
}

/// One CD-k parameter update from a mini-batch. The positive phase uses the
/// data vector with hidden probabilities; the Gibbs chain samples the hidden
/// layer and reconstructs the visible layer as probabilities. Updates are the
/// batch mean of the gradient terms scaled by the learning rate.
inline void cd_update(Rbm& model, const std::vector<std::vector<double>>& batch, double lr, Rng& rng,
                      std::size_t cd_steps = 1) {
    check_visible_batch(model, batch);
    if (cd_steps < 1) {
        throw std::invalid_argument("cd_steps must be positive");
    }
    const std::size_t nv = model.n_visible;
    const std::size_t nh = model.n_hidden;
    std::vector<double> dw(nv * nh, 0.0);
    std::vector<double> da(nv, 0.0);
    std::vector<double> db(nh, 0.0);
    std::vector<double> h_sample(nh);

    for (const auto& v0 : batch) {
        const std::vector<double> ph0 = hidden_probs(model, v0);
        std::vector<double> vk = v0;
        std::vector<double> phk = ph0;
        for (std::size_t step = 0; step < cd_steps; ++step) {
            for (std::size_t i = 0; i < nh; ++i) {
                h_sample[i] = rng.bernoulli(phk[i]) ? 1.0 : 0.0;
            }
            vk = visible_probs(model, h_sample);
            phk = hidden_probs(model, vk);
        }
        for (std::size_t i = 0; i < nh; ++i) {
            for (std::size_t j = 0; j < nv; ++j) {
                dw[i * nv + j] += ph0[i] * v0[j] - phk[i] * vk[j];
            }
        }
        for (std::size_t j = 0; j < nv; ++j) {
            da[j] += v0[j] - vk[j];
        }
        for (std::size_t i = 0; i < nh; ++i) {
            db[i] += ph0[i] - phk[i];
        }
    }

    const double scale = lr / static_cast<double>(batch.size());
    for (std::size_t idx = 0; idx < dw.size(); ++idx) {
        model.weights[idx] += scale * dw[idx];
    }
    for (std::size_t j = 0; j < nv; ++j) {
        model.visible_bias[j] += scale * da[j];
    }
    for (std::size_t i = 0; i < nh; ++i) {
        model.hidden_bias[i] += scale * db[i];
    }
}

inline Rbm init_rbm(std::size_t n_visible, std::size_t n_hidden, Rng& rng) {
    Rbm model;
    model.n_visible = n_visible;
    model.n_hidden = n_hidden;
    model.weights.resize(n_visible * n_hidden);
    for (double& w : model.weights) {
        w = rng.normal(0.0, 0.01);
    }
    model.visible_bias.assign(n_visible, 0.0);
    model.hidden_bias.assign(n_hidden, 0.0);
    return model;
}

/// Trains an RBM with shuffled mini-batches of CD updates. Deterministic for a
/// fixed (data, config) input.
inline Rbm train_rbm(const std::vector<std::vector<double>>& data, std::size_t n_hidden,
                     const TrainConfig& config) {
    if (data.empty()) {
        throw std::invalid_argument("training data must be non-empty");
    }
    validate_train_config(config);
    const std::size_t n_visible = data[0].size();
    Rng rng(config.seed);
    Rbm model = init_rbm(n_visible, n_hidden, rng);
    check_visible_batch(model, data);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> batch;
    batch.reserve(config.batch_size);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            batch.clear();
            const std::size_t stop = std::min(start + config.batch_size, order.size());
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(data[order[i]]);
            }
            cd_update(model, batch, config.learning_rate, rng, config.cd_steps);
        }
    }
    return model;
}

/// Deterministic mean-field reconstruction: alternating hidden/visible
/// probability passes, no sampling.
inline std::vector<double> reconstruct(const Rbm& model, const std::vector<double>& v,
                                       std::size_t gibbs_steps = 1) {
    if (gibbs_steps < 1) {
        throw std::invalid_argument("gibbs_steps must be positive");
    }
    std::vector<double> current = v;
    for (std::size_t step = 0; step < gibbs_steps; ++step) {
        current = visible_probs(model, hidden_probs(model, current));
    }
    return current;
}

/// Mean squared error between each vector and its one-step reconstruction.
inline double reconstruction_error(const Rbm& model, const std::vector<std::vector<double>>& data) {
    if (data.empty()) {
        throw std::invalid_argument("data must be non-empty");
    }
    double total = 0.0;
    for (const auto& v : data) {
        const std::vector<double> r = reconstruct(model, v, 1);
        double sq = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double d = v[j] - r[j];
            sq += d * d;
        }
        total += sq / static_cast<double>(v.size());
    }
    return total / static_cast<double>(data.size());
}

inline void to_json(nlohmann::json& j, const Rbm& model) {
    j = nlohmann::json{{"format_version", 1},
                       {"type", "rbm"},
                       {"n_visible", model.n_visible},
                       {"n_hidden", model.n_hidden},
                       {"weights", model.weights},
                       {"visible_bias", model.visible_bias},
                       {"hidden_bias", model.hidden_bias}};
}

inline void from_json(const nlohmann::json& j, Rbm& model) {
    if (j.at("type").get<std::string>() != "rbm") {
        throw std::invalid_argument("expected model type 'rbm'");
    }
    model.n_visible = j.at("n_visible").get<std::size_t>();
    model.n_hidden = j.at("n_hidden").get<std::size_t>();
    j.at("weights").get_to(model.weights);
    j.at("visible_bias").get_to(model.visible_bias);
    j.at("hidden_bias").get_to(model.hidden_bias);
    if (model.weights.size() != model.n_visible * model.n_hidden ||
        model.visible_bias.size() != model.n_visible || model.hidden_bias.size() != model.n_hidden) {
        throw std::invalid_argument("rbm parameter dimensions are inconsistent");
    }
}

}  // namespace fddkit
