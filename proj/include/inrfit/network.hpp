#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "inrfit/activation.hpp"
#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"
#include "inrfit/positional_encoding.hpp"
#include "inrfit/rng.hpp"

namespace inrfit {

struct Layer {
    Matrix weights; // fan_out x fan_in
    std::optional<std::vector<double>> bias;
    ActivationSpec activation;

    int fan_in() const { return weights.cols; }
    int fan_out() const { return weights.rows; }
};

struct Model {
    std::vector<Layer> layers;
    int input_dim = 0;
    std::optional<PositionalEncodingSpec> encoder;
    bool outermost_linear = true;
};

// Architecture plus init hyperparameters for build_model. f_nyquist is in
// cycles per signal and is required for the Fm kinds; omega0 values feed the
// init bounds (and the activation itself for Sine/Finer). For Fm kinds the
// per-neuron ladder replaces omega0 inside the activation.
struct ModelSpec {
    int input_dim = 1;
    std::vector<int> hidden_widths;
    int output_dim = 1;
    ActivationKind kind = ActivationKind::Sine;

    double first_omega0 = 30.0;
    double hidden_omega0 = 30.0;
    double gauss_scale = 16.0;

    std::optional<double> f_nyquist;
    double nyquist_factor = 1.0;
    // f_nyquist counts cycles per signal while the activation argument is in
    // radians over [-1,1] (2 units), so the ladder needs the factor pi to
    // reach the stated frequency; angular_scale=1.0 keeps raw cycle units.
    double angular_scale = 3.14159265358979323846;
    int k_offset = 0;
    bool first_layer_only = false;

    std::optional<bool> outermost_linear; // unset: per-kind default
    std::optional<PositionalEncodingSpec> encoder;
};

inline bool default_outermost_linear(ActivationKind kind) {
    // Linear head for SIREN/FM-SIREN, activated head for the FINER family
    // and Gauss, matching each method's reference setup.
    switch (kind) {
        case ActivationKind::Sine:
        case ActivationKind::FmSine:
        case ActivationKind::Linear:
            return true;
        default:
            return false;
    }
}

namespace detail {

inline ActivationKind base_kind(ActivationKind k) {
    if (k == ActivationKind::FmSine) return ActivationKind::Sine;
    if (k == ActivationKind::FmFiner) return ActivationKind::Finer;
    return k;
}

inline bool finer_family(ActivationKind k) {
    return k == ActivationKind::Finer || k == ActivationKind::FmFiner;
}

} // namespace detail

inline Model build_model(const ModelSpec& spec, Rng& rng) {
    if (spec.hidden_widths.empty()) throw ConfigError("build_model: no hidden widths");
    for (int w : spec.hidden_widths)
        if (w < 1) throw ConfigError("build_model: hidden width must be >= 1, got " + std::to_string(w));
    if (spec.input_dim < 1) throw ConfigError("build_model: input_dim must be >= 1");
    if (spec.output_dim < 1) throw ConfigError("build_model: output_dim must be >= 1");
    if (is_fm(spec.kind) && !spec.f_nyquist)
        throw ConfigError("build_model: " + to_string(spec.kind) + " requires f_nyquist");
    if (is_periodic(spec.kind) && (!(spec.first_omega0 > 0.0) || !(spec.hidden_omega0 > 0.0)))
        throw ConfigError("build_model: omega0 must be positive for periodic kinds");
    if (spec.encoder && spec.encoder->input_dim != spec.input_dim)
        throw ConfigError("build_model: encoder input_dim " + std::to_string(spec.encoder->input_dim) +
                          " != model input_dim " + std::to_string(spec.input_dim));

    Model model;
    model.input_dim = spec.input_dim;
    model.encoder = spec.encoder;
    model.outermost_linear = spec.outermost_linear.value_or(default_outermost_linear(spec.kind));

    const bool periodic = is_periodic(spec.kind);
    std::vector<int> dims;
    dims.push_back(spec.encoder ? spec.encoder->total_embed() : spec.input_dim);
    for (int w : spec.hidden_widths) dims.push_back(w);
    dims.push_back(spec.output_dim);

    const int n_layers = static_cast<int>(dims.size()) - 1;
    for (int li = 0; li < n_layers; ++li) {
        const int fan_in = dims[static_cast<size_t>(li)];
        const int fan_out = dims[static_cast<size_t>(li) + 1];
        const bool first = li == 0;
        const bool last = li == n_layers - 1;

        Layer layer;
        const double omega0 = first ? spec.first_omega0 : spec.hidden_omega0;
        if (first) {
            layer.weights = uniform_matrix(rng, fan_out, fan_in, -1.0 / fan_in, 1.0 / fan_in);
        } else {
            double bound = std::sqrt(6.0 / fan_in);
            if (periodic) bound /= spec.hidden_omega0;
            layer.weights = uniform_matrix(rng, fan_out, fan_in, -bound, bound);
        }

        const bool biasless = first && spec.encoder.has_value();
        if (!biasless) {
            std::vector<double> b(static_cast<size_t>(fan_out));
            if (first && detail::finer_family(spec.kind)) {
                for (auto& v : b) v = rng.uniform(-1.0, 1.0);
            } else {
                const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
                for (auto& v : b) v = rng.uniform(-bb, bb);
            }
            layer.bias = std::move(b);
        }

        ActivationSpec act;
        act.omega0 = omega0;
        act.gauss_scale = spec.gauss_scale;
        if (last) {
            act.kind = model.outermost_linear ? ActivationKind::Linear : detail::base_kind(spec.kind);
        } else if (is_fm(spec.kind) && (!spec.first_layer_only || first)) {
            act.kind = spec.kind;
            act.multipliers = make_fm_multipliers(fan_out, *spec.f_nyquist, spec.nyquist_factor,
                                                  spec.k_offset, spec.angular_scale);
        } else {
            act.kind = detail::base_kind(spec.kind);
        }
        layer.activation = std::move(act);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

inline size_t param_count(const Model& model) {
    size_t n = 0;
    for (const auto& layer : model.layers) {
        n += layer.weights.size();
        if (layer.bias) n += layer.bias->size();
    }
    return n;
}

struct ForwardCache {
    Matrix input;              // encoded coords (or raw coords if no encoder)
    std::vector<Matrix> pre;   // z per layer
    std::vector<Matrix> post;  // a per layer

    const Matrix& output() const { return post.back(); }
};

namespace detail {

inline Matrix affine(const Matrix& a, const Layer& layer) {
    Matrix z = matmul(a, transpose(layer.weights));
    if (layer.bias) {
        const double* b = layer.bias->data();
        for (int i = 0; i < z.rows; ++i) {
            double* zr = z.row(i);
            for (int j = 0; j < z.cols; ++j) zr[j] += b[j];
        }
    }
    return z;
}

} // namespace detail

inline ForwardCache forward(const Model& model, const Matrix& coords) {
    if (coords.cols != model.input_dim)
        throw ShapeError("forward: coords are " + shape_str(coords) + ", model expects input_dim " +
                         std::to_string(model.input_dim));
    ForwardCache cache;
    cache.input = model.encoder ? positional_encode(*model.encoder, coords) : coords;
    const Matrix* a = &cache.input;
    for (const auto& layer : model.layers) {
        cache.pre.push_back(detail::affine(*a, layer));
        cache.post.push_back(activate(layer.activation, cache.pre.back()));
        a = &cache.post.back();
    }
    return cache;
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases; // empty vector for biasless layers
};

// Reverse-mode gradients for the loss whose d(loss)/d(output) is grad_output.
// Column sums and the A^T*B products accumulate over samples in ascending
// order, so gradients are bit-stable for a fixed batch.
inline Gradients backward(const Model& model, const ForwardCache& cache, const Matrix& grad_output) {
    const size_t L = model.layers.size();
    if (cache.pre.size() != L || cache.post.size() != L)
        throw Error("backward: cache has " + std::to_string(cache.pre.size()) + " layers, model has " +
                    std::to_string(L));
    for (size_t l = 0; l < L; ++l)
        if (cache.pre[l].cols != model.layers[l].fan_out())
            throw Error("backward: cache layer " + std::to_string(l) + " width " +
                        std::to_string(cache.pre[l].cols) + " does not match model fan_out " +
                        std::to_string(model.layers[l].fan_out()));
    if (cache.input.cols != model.layers.front().fan_in())
        throw Error("backward: cached input width does not match first layer fan_in");
    if (!grad_output.same_shape(cache.post.back()))
        throw ShapeError("backward: grad_output is " + shape_str(grad_output) + ", output is " +
                         shape_str(cache.post.back()));

    Gradients grads;
    grads.weights.resize(L);
    grads.biases.resize(L);

    // delta = dLoss/dz for the current layer
    Matrix delta = activate_grad(model.layers[L - 1].activation, cache.pre[L - 1]);
    for (size_t i = 0; i < delta.size(); ++i) delta.data[i] *= grad_output.data[i];

    for (size_t l = L; l-- > 0;) {
        const Matrix& a_prev = l == 0 ? cache.input : cache.post[l - 1];
        grads.weights[l] = matmul_tn(delta, a_prev);
        if (model.layers[l].bias) {
            std::vector<double> db(static_cast<size_t>(delta.cols), 0.0);
            for (int i = 0; i < delta.rows; ++i) {
                const double* dr = delta.row(i);
                for (int j = 0; j < delta.cols; ++j) db[static_cast<size_t>(j)] += dr[j];
            }
            grads.biases[l] = std::move(db);
        }
        if (l > 0) {
            Matrix next = matmul(delta, model.layers[l].weights);
            Matrix g = activate_grad(model.layers[l - 1].activation, cache.pre[l - 1]);
            for (size_t i = 0; i < next.size(); ++i) next.data[i] *= g.data[i];
            delta = std::move(next);
        }
    }
    return grads;
}

} // namespace inrfit
