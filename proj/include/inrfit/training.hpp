#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "inrfit/dataset.hpp"
#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"
#include "inrfit/network.hpp"
#include "inrfit/rng.hpp"

namespace inrfit {

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 500;
    double lr_decay_gamma = 0.1;
    int lr_decay_every = 100;
    std::optional<int> batch_size; // unset: full batch
    uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

inline void validate(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be positive");
    if (cfg.epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
    if (!(cfg.lr_decay_gamma > 0.0) || cfg.lr_decay_gamma > 1.0)
        throw ConfigError("TrainConfig: lr_decay_gamma must be in (0, 1]");
    if (cfg.lr_decay_every < 1) throw ConfigError("TrainConfig: lr_decay_every must be >= 1");
    if (cfg.batch_size && *cfg.batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    auto beta_ok = [](double b) { return b >= 0.0 && b < 1.0; };
    if (!beta_ok(cfg.adam_beta1) || !beta_ok(cfg.adam_beta2))
        throw ConfigError("TrainConfig: adam betas must be in [0, 1)");
    if (!(cfg.adam_eps > 0.0)) throw ConfigError("TrainConfig: adam_eps must be positive");
}

// Mean squared error over all elements plus its gradient 2(pred-target)/N.
inline std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target))
        throw ShapeError("mse_loss: pred " + shape_str(pred) + " vs target " + shape_str(target));
    const double n = static_cast<double>(pred.size());
    Matrix grad(pred.rows, pred.cols);
    double loss = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        loss += d * d;
        grad.data[i] = 2.0 * d / n;
    }
    return {loss / n, std::move(grad)};
}

struct AdamState {
    struct Moments {
        std::vector<double> m, v;
    };
    std::vector<Moments> weights;
    std::vector<Moments> biases;
    long t = 0;

    explicit AdamState(const Model& model) {
        for (const auto& layer : model.layers) {
            weights.push_back({std::vector<double>(layer.weights.size(), 0.0),
                               std::vector<double>(layer.weights.size(), 0.0)});
            const size_t nb = layer.bias ? layer.bias->size() : 0;
            biases.push_back({std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0)});
        }
    }
};

namespace detail {

inline void adam_update(double* theta, const double* g, double* m, double* v, size_t n, long t,
                        double lr, double b1, double b2, double eps) {
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

} // namespace detail

// One bias-corrected Adam step over every model parameter; the shared step
// counter increments exactly once per call.
inline void adam_step(AdamState& state, Model& model, const Gradients& grads, double lr,
                      const TrainConfig& cfg) {
    if (lr < 0.0) throw ConfigError("adam_step: negative learning rate");
    if (grads.weights.size() != model.layers.size() || state.weights.size() != model.layers.size())
        throw ShapeError("adam_step: gradient/state layer count does not match model");
    state.t += 1;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        Layer& layer = model.layers[l];
        if (!grads.weights[l].same_shape(layer.weights))
            throw ShapeError("adam_step: layer " + std::to_string(l) + " gradient " +
                             shape_str(grads.weights[l]) + " vs weights " + shape_str(layer.weights));
        detail::adam_update(layer.weights.data.data(), grads.weights[l].data.data(),
                            state.weights[l].m.data(), state.weights[l].v.data(), layer.weights.size(),
                            state.t, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        if (layer.bias) {
            if (grads.biases[l].size() != layer.bias->size())
                throw ShapeError("adam_step: layer " + std::to_string(l) + " bias gradient size mismatch");
            detail::adam_update(layer.bias->data(), grads.biases[l].data(), state.biases[l].m.data(),
                                state.biases[l].v.data(), layer.bias->size(), state.t, lr,
                                cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        }
    }
}

inline double scheduled_lr(const TrainConfig& cfg, int epoch) {
    if (epoch < 0) throw ConfigError("scheduled_lr: negative epoch");
    const int k = epoch / cfg.lr_decay_every;
    return cfg.learning_rate * std::pow(cfg.lr_decay_gamma, static_cast<double>(k));
}

struct RunReport {
    std::vector<double> loss;    // per epoch
    std::vector<double> lr;      // per epoch
    std::vector<double> seconds; // per epoch wall time
};

namespace detail {

inline Matrix gather_rows(const Matrix& src, const std::vector<int>& order, int begin, int end) {
    Matrix out(end - begin, src.cols);
    for (int i = begin; i < end; ++i) {
        const double* s = src.row(order[static_cast<size_t>(i)]);
        double* d = out.row(i - begin);
        for (int j = 0; j < src.cols; ++j) d[j] = s[j];
    }
    return out;
}

} // namespace detail

// Epoch loop of forward -> mse -> backward -> adam at the scheduled rate.
// Full batch by default; with batch_size set, a seeded shuffle partitions
// each epoch and the reported loss is the sample-weighted batch mean.
inline RunReport train(Model& model, const SignalDataset& dataset, const TrainConfig& cfg) {
    validate(cfg);
    if (dataset.coords.rows != dataset.targets.rows)
        throw DataError("train: dataset has " + std::to_string(dataset.coords.rows) + " coords but " +
                        std::to_string(dataset.targets.rows) + " targets");
    if (dataset.coords.cols != model.input_dim)
        throw ShapeError("train: coords are " + shape_str(dataset.coords) + ", model input_dim is " +
                         std::to_string(model.input_dim));
    if (!model.layers.empty() && dataset.targets.cols != model.layers.back().fan_out())
        throw ShapeError("train: targets are " + shape_str(dataset.targets) + ", model output dim is " +
                         std::to_string(model.layers.back().fan_out()));

    const int n = dataset.coords.rows;
    const int batch = cfg.batch_size ? std::min(*cfg.batch_size, n) : n;
    const bool full = batch >= n;

    RunReport report;
    AdamState state(model);
    Rng shuffle_rng(cfg.seed);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = scheduled_lr(cfg, epoch);
        double epoch_loss = 0.0;

        if (full) {
            ForwardCache cache = forward(model, dataset.coords);
            auto [loss, grad] = mse_loss(cache.output(), dataset.targets);
            epoch_loss = loss;
            if (std::isfinite(loss)) {
                Gradients grads = backward(model, cache, grad);
                adam_step(state, model, grads, lr, cfg);
            }
        } else {
            for (size_t i = order.size() - 1; i > 0; --i) {
                const size_t j = static_cast<size_t>(shuffle_rng.next_u64() % (i + 1));
                std::swap(order[i], order[j]);
            }
            for (int begin = 0; begin < n; begin += batch) {
                const int end = std::min(begin + batch, n);
                Matrix bc = detail::gather_rows(dataset.coords, order, begin, end);
                Matrix bt = detail::gather_rows(dataset.targets, order, begin, end);
                ForwardCache cache = forward(model, bc);
                auto [loss, grad] = mse_loss(cache.output(), bt);
                epoch_loss += loss * (end - begin);
                if (!std::isfinite(loss)) break;
                Gradients grads = backward(model, cache, grad);
                adam_step(state, model, grads, lr, cfg);
            }
            epoch_loss /= n;
        }

        const auto t1 = std::chrono::steady_clock::now();
        report.loss.push_back(epoch_loss);
        report.lr.push_back(lr);
        report.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (!std::isfinite(epoch_loss))
            throw DivergedError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
    }
    return report;
}

} // namespace inrfit
