#pragma once

#include <cmath>
#include <vector>

#include "inrfit/activation.hpp"
#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

// Fourier feature embedding gamma(x): per input dimension, sin/cos pairs at a
// geometric frequency ladder from 2^0 up to 2^(scale-1), interpolated when
// levels_per_dim differs from scale.
struct PositionalEncodingSpec {
    int levels_per_dim = 0;
    int scale = 15;
    int input_dim = 0;

    int total_embed() const { return 2 * levels_per_dim * input_dim; }
};

inline std::vector<double> encoding_frequencies(const PositionalEncodingSpec& spec) {
    if (spec.levels_per_dim < 1)
        throw ConfigError("positional encoding: levels_per_dim must be >= 1, got " +
                          std::to_string(spec.levels_per_dim));
    if (spec.scale < 1)
        throw ConfigError("positional encoding: scale must be >= 1, got " + std::to_string(spec.scale));
    const int L = spec.levels_per_dim;
    std::vector<double> freqs(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) {
        const double e = L > 1 ? static_cast<double>(l) * (spec.scale - 1) / (L - 1) : 0.0;
        freqs[static_cast<size_t>(l)] = std::exp2(e);
    }
    return freqs;
}

// Column order: dimension-major, level-minor, sin before cos, so column
// 2*(d*L + l) is sin(f_l pi x_d) and the next one is the matching cos.
inline Matrix positional_encode(const PositionalEncodingSpec& spec, const Matrix& coords) {
    if (coords.cols != spec.input_dim)
        throw ShapeError("positional_encode: coords have " + std::to_string(coords.cols) +
                         " dims, spec expects " + std::to_string(spec.input_dim));
    const auto freqs = encoding_frequencies(spec);
    const int L = spec.levels_per_dim;
    Matrix out(coords.rows, spec.total_embed());
    constexpr double pi = 3.14159265358979323846;
    for (int i = 0; i < coords.rows; ++i) {
        const double* cr = coords.row(i);
        double* orow = out.row(i);
        for (int d = 0; d < spec.input_dim; ++d) {
            const double x = cr[d];
            double* dst = orow + static_cast<size_t>(d) * 2 * L;
            for (int l = 0; l < L; ++l) {
                const double arg = freqs[static_cast<size_t>(l)] * pi * x;
                dst[2 * l] = detail::fast_sin(arg);
                dst[2 * l + 1] = detail::fast_cos(arg);
            }
        }
    }
    return out;
}

} // namespace inrfit
