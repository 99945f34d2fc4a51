#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"
#include "inrfit/network.hpp"
#include "inrfit/rng.hpp"

namespace inrfit {

// Hidden-feature redundancy measurement: covariance of one layer's
// post-activations over random coordinates, summarized by its Frobenius norm.
struct RedundancyReport {
    int layer_index = 0;
    Matrix covariance; // K x K
    double frobenius = 0.0;
    int n_samples = 0;
};

inline RedundancyReport hidden_covariance(const Model& model, int layer_index, Rng& sampler,
                                          int n_samples = 10000) {
    if (layer_index < 0 || layer_index >= static_cast<int>(model.layers.size()))
        throw ConfigError("hidden_covariance: layer " + std::to_string(layer_index) + " out of range [0, " +
                          std::to_string(model.layers.size()) + ")");
    if (n_samples < 2) throw ConfigError("hidden_covariance: need at least 2 samples");

    const int width = model.layers[static_cast<size_t>(layer_index)].fan_out();
    Matrix features(n_samples, width);
    constexpr int chunk = 32768;
    for (int begin = 0; begin < n_samples; begin += chunk) {
        const int end = std::min(begin + chunk, n_samples);
        Matrix coords = uniform_matrix(sampler, end - begin, model.input_dim, -1.0, 1.0);
        ForwardCache cache = forward(model, coords);
        const Matrix& acts = cache.post[static_cast<size_t>(layer_index)];
        for (int i = begin; i < end; ++i) {
            const double* s = acts.row(i - begin);
            double* d = features.row(i);
            for (int j = 0; j < width; ++j) d[j] = s[j];
        }
    }

    std::vector<double> mean(static_cast<size_t>(width), 0.0);
    for (int i = 0; i < n_samples; ++i) {
        const double* r = features.row(i);
        for (int j = 0; j < width; ++j) mean[static_cast<size_t>(j)] += r[j];
    }
    for (auto& m : mean) m /= n_samples;
    for (int i = 0; i < n_samples; ++i) {
        double* r = features.row(i);
        for (int j = 0; j < width; ++j) r[j] -= mean[static_cast<size_t>(j)];
    }

    RedundancyReport report;
    report.layer_index = layer_index;
    report.n_samples = n_samples;
    report.covariance = matmul_tn(features, features);
    const double scale = 1.0 / (n_samples - 1);
    for (auto& v : report.covariance.data) v *= scale;
    double sq = 0.0;
    for (double v : report.covariance.data) sq += v * v;
    report.frobenius = std::sqrt(sq);
    return report;
}

// Percent drop in covariance Frobenius norm relative to the baseline.
inline double redundancy_reduction(const RedundancyReport& baseline, const RedundancyReport& fm) {
    if (!baseline.covariance.same_shape(fm.covariance))
        throw ShapeError("redundancy_reduction: covariance " + shape_str(baseline.covariance) + " vs " +
                         shape_str(fm.covariance));
    if (baseline.frobenius == 0.0) throw MathError("redundancy_reduction: baseline norm is zero");
    return 100.0 * (baseline.frobenius - fm.frobenius) / baseline.frobenius;
}

} // namespace inrfit
