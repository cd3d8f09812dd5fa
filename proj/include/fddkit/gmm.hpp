#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fddkit/rng.hpp"

namespace fddkit {

constexpr double kGmmVarianceFloor = 1e-6;

/// Diagonal-covariance Gaussian mixture.
struct Gmm {
    std::size_t n_components = 0;
    std::size_t dim = 0;
    std::vector<double> weights;             // simplex, length n_components
    std::vector<std::vector<double>> means;     // n_components x dim
    std::vector<std::vector<double>> variances; // n_components x dim, >= variance floor
};

namespace detail {

inline double log_diag_gaussian(const std::vector<double>& x, const std::vector<double>& mean,
                                const std::vector<double>& variance) {
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    double ll = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double diff = x[d] - mean[d];
        ll += -0.5 * (kLog2Pi + std::log(variance[d]) + diff * diff / variance[d]);
    }
    return ll;
}

inline double log_sum_exp(const std::vector<double>& values) {
    const double max_v = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(max_v)) {
        return max_v;
    }
    double total = 0.0;
    for (double v : values) {
        total += std::exp(v - max_v);
    }
    return max_v + std::log(total);
}

// Log joint density log(w_k N(x; mu_k, var_k)) for every component.
inline std::vector<double> component_log_joint(const Gmm& model, const std::vector<double>& x) {
    std::vector<double> lj(model.n_components);
    for (std::size_t k = 0; k < model.n_components; ++k) {
        lj[k] = std::log(model.weights[k]) + log_diag_gaussian(x, model.means[k], model.variances[k]);
    }
    return lj;
}

}  // namespace detail

/// Posterior component probabilities for one observation.
inline std::vector<double> responsibilities(const Gmm& model, const std::vector<double>& v) {
    if (v.size() != model.dim) {
        throw std::invalid_argument("observation dimension mismatch");
    }
    std::vector<double> lj = detail::component_log_joint(model, v);
    const double norm = detail::log_sum_exp(lj);
    std::vector<double> r(model.n_components);
    for (std::size_t k = 0; k < model.n_components; ++k) {
        r[k] = std::exp(lj[k] - norm);
    }
    return r;
}

inline double log_likelihood(const Gmm& model, const std::vector<std::vector<double>>& data) {
    double total = 0.0;
    for (const auto& x : data) {
        total += detail::log_sum_exp(detail::component_log_joint(model, x));
    }
    return total;
}

/// Deterministic reconstruction: responsibility-weighted mixture of component means.
inline std::vector<double> reconstruct(const Gmm& model, const std::vector<double>& v) {
    const std::vector<double> r = responsibilities(model, v);
    std::vector<double> out(model.dim, 0.0);
    for (std::size_t k = 0; k < model.n_components; ++k) {
        for (std::size_t d = 0; d < model.dim; ++d) {
            out[d] += r[k] * model.means[k][d];
        }
    }
    return out;
}

namespace detail {

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        total += diff * diff;
    }
    return total;
}

// k-means++ style seeding: first center uniform, later centers drawn with
// probability proportional to squared distance from the nearest chosen center.
inline std::vector<std::vector<double>> seed_means(const std::vector<std::vector<double>>& data,
                                                   std::size_t k, Rng& rng) {
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    centers.push_back(data[rng.below(data.size())]);
    std::vector<double> dist(data.size());
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double best = squared_distance(data[i], centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c) {
                best = std::min(best, squared_distance(data[i], centers[c]));
            }
            dist[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all points coincide with chosen centers; duplicate one
            centers.push_back(data[rng.below(data.size())]);
            continue;
        }
        double draw = rng.uniform() * total;
        std::size_t pick = data.size() - 1;
        for (std::size_t i = 0; i < data.size(); ++i) {
            draw -= dist[i];
            if (draw <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(data[pick]);
    }
    return centers;
}

}  // namespace detail

/// Fits a diagonal GMM with EM. Stops after max_iters or when the
/// log-likelihood improves by less than tol. Deterministic given the seed.
/// When loglik_trace is provided it receives the per-iteration log-likelihood.
inline Gmm fit_em(const std::vector<std::vector<double>>& data, std::size_t n_components,
                  std::uint64_t seed, std::size_t max_iters = 200, double tol = 1e-7,
                  std::vector<double>* loglik_trace = nullptr) {
    if (n_components < 1) {
        throw std::invalid_argument("n_components must be positive");
    }
    if (data.size() < n_components) {
        throw std::invalid_argument("need at least n_components data points");
    }
    const std::size_t dim = data[0].size();
    for (const auto& x : data) {
        if (x.size() != dim) {
            throw std::invalid_argument("data vectors must share one dimension");
        }
    }

    Rng rng(seed);
    Gmm model;
    model.n_components = n_components;
    model.dim = dim;
    model.weights.assign(n_components, 1.0 / static_cast<double>(n_components));
    model.means = detail::seed_means(data, n_components, rng);

    // global per-dimension variance as the initial spread
    std::vector<double> global_mean(dim, 0.0);
    for (const auto& x : data) {
        for (std::size_t d = 0; d < dim; ++d) {
            global_mean[d] += x[d];
        }
    }
    for (double& g : global_mean) {
        g /= static_cast<double>(data.size());
    }
    std::vector<double> global_var(dim, 0.0);
    for (const auto& x : data) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = x[d] - global_mean[d];
            global_var[d] += diff * diff;
        }
    }
    for (double& g : global_var) {
        g = std::max(g / static_cast<double>(data.size()), kGmmVarianceFloor);
    }
    model.variances.assign(n_components, global_var);

    const std::size_t n = data.size();
    std::vector<std::vector<double>> resp(n, std::vector<double>(n_components));
    double previous_ll = -std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // E step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> lj = detail::component_log_joint(model, data[i]);
            const double norm = detail::log_sum_exp(lj);
            ll += norm;
            for (std::size_t k = 0; k < n_components; ++k) {
                resp[i][k] = std::exp(lj[k] - norm);
            }
        }
        if (loglik_trace) {
            loglik_trace->push_back(ll);
        }

        // M step
        for (std::size_t k = 0; k < n_components; ++k) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i][k];
            }
            if (nk < 1e-10) {
                // dead component: re-seed at the datum the mixture explains worst
                std::size_t worst = 0;
                double worst_ll = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    const double li = detail::log_sum_exp(detail::component_log_joint(model, data[i]));
                    if (li < worst_ll) {
                        worst_ll = li;
                        worst = i;
                    }
                }
                model.means[k] = data[worst];
                model.variances[k] = global_var;
                model.weights[k] = 1.0 / static_cast<double>(n);
                continue;
            }
            model.weights[k] = nk / static_cast<double>(n);
            for (std::size_t d = 0; d < dim; ++d) {
                double mean = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    mean += resp[i][k] * data[i][d];
                }
                mean /= nk;
                double var = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double diff = data[i][d] - mean;
                    var += resp[i][k] * diff * diff;
                }
                model.means[k][d] = mean;
                model.variances[k][d] = std::max(var / nk, kGmmVarianceFloor);
            }
        }
        // renormalize in case a component was re-seeded
        double wsum = 0.0;
        for (double w : model.weights) {
            wsum += w;
        }
        for (double& w : model.weights) {
            w /= wsum;
        }

        if (ll - previous_ll < tol && iter > 0) {
            break;
        }
        previous_ll = ll;
    }
    return model;
}

inline void to_json(nlohmann::json& j, const Gmm& model) {
    j = nlohmann::json{{"format_version", 1}, {"type", "gmm"},
                       {"n_components", model.n_components}, {"dim", model.dim},
                       {"weights", model.weights}, {"means", model.means},
                       {"variances", model.variances}};
}

inline void from_json(const nlohmann::json& j, Gmm& model) {
    if (j.at("type").get<std::string>() != "gmm") {
        throw std::invalid_argument("expected model type 'gmm'");
    }
    model.n_components = j.at("n_components").get<std::size_t>();
    model.dim = j.at("dim").get<std::size_t>();
    j.at("weights").get_to(model.weights);
    j.at("means").get_to(model.means);
    j.at("variances").get_to(model.variances);
    if (model.weights.size() != model.n_components || model.means.size() != model.n_components ||
        model.variances.size() != model.n_components) {
        throw std::invalid_argument("gmm parameter dimensions are inconsistent");
    }
    for (std::size_t k = 0; k < model.n_components; ++k) {
        if (model.means[k].size() != model.dim || model.variances[k].size() != model.dim) {
            throw std::invalid_argument("gmm component dimension mismatch");
        }
    }
}

}  // namespace fddkit
