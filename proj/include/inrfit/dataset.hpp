#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "inrfit/classical.hpp"
#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

// Coordinates in [-1,1]^d with matching targets; value_range feeds the
// max_value of PSNR/SSIM.
struct SignalDataset {
    Matrix coords;   // n x d
    Matrix targets;  // n x c
    SamplingInfo sampling;
    double value_min = 0.0;
    double value_max = 1.0;
};

// Evenly spaced grid over [-1,1] per axis, endpoints included, axis-0-major
// row order (last axis varies fastest).
inline Matrix make_grid(const std::vector<int>& dims) {
    if (dims.empty()) throw DataError("make_grid: no dimensions");
    size_t n = 1;
    for (int c : dims) {
        if (c < 2) throw DataError("make_grid: axis count must be >= 2, got " + std::to_string(c));
        n *= static_cast<size_t>(c);
    }
    const int d = static_cast<int>(dims.size());
    Matrix grid(static_cast<int>(n), d);
    std::vector<size_t> counter(static_cast<size_t>(d), 0);
    for (size_t i = 0; i < n; ++i) {
        double* row = grid.row(static_cast<int>(i));
        for (int a = 0; a < d; ++a) {
            const int c = dims[static_cast<size_t>(a)];
            row[a] = 2.0 * static_cast<double>(counter[static_cast<size_t>(a)]) / (c - 1) - 1.0;
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++counter[static_cast<size_t>(a)] < static_cast<size_t>(dims[static_cast<size_t>(a)])) break;
            counter[static_cast<size_t>(a)] = 0;
        }
    }
    return grid;
}

// Sum of sinusoids sampled at `rate` Hz. Every component must sit strictly
// below Nyquist so the synthetic signal is alias-free by construction.
inline SignalDataset synth_audio(double duration_s, double rate,
                                 const std::vector<std::pair<double, double>>& components) {
    if (!(duration_s > 0.0)) throw DataError("synth_audio: duration must be positive");
    if (!(rate > 0.0)) throw DataError("synth_audio: sample rate must be positive");
    const long long n = std::llround(duration_s * rate);
    if (n < 2) throw DataError("synth_audio: fewer than 2 samples");
    for (const auto& [freq, amp] : components) {
        (void)amp;
        if (freq < 0.0) throw DataError("synth_audio: negative component frequency");
        if (!(freq < rate / 2.0))
            throw DataError("synth_audio: component at " + std::to_string(freq) +
                            " Hz reaches Nyquist for rate " + std::to_string(rate));
    }
    SignalDataset ds;
    ds.coords = Matrix(static_cast<int>(n), 1);
    ds.targets = Matrix(static_cast<int>(n), 1);
    constexpr double two_pi = 6.28318530717958647692;
    for (long long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        double v = 0.0;
        for (const auto& [freq, amp] : components) v += amp * std::sin(two_pi * freq * t);
        ds.coords(static_cast<int>(i), 0) = 2.0 * static_cast<double>(i) / (n - 1) - 1.0;
        ds.targets(static_cast<int>(i), 0) = v;
    }
    ds.sampling.sample_counts = {static_cast<int>(n)};
    ds.sampling.sample_rate = rate;
    ds.value_min = -1.0;
    ds.value_max = 1.0;
    return ds;
}

// Concentric-ring pattern 0.5 + 0.5 sin(ring_count * pi * r). The radius is
// measured from the pixel at index (size/2, size/2) in units of half the
// image size, so one pixel sits exactly at r = 0 for any size.
inline SignalDataset synth_circles_image(int size, int ring_count) {
    if (size < 16) throw DataError("synth_circles_image: size must be >= 16, got " + std::to_string(size));
    if (ring_count < 1) throw DataError("synth_circles_image: ring_count must be >= 1");
    SignalDataset ds;
    ds.coords = make_grid({size, size});
    ds.targets = Matrix(size * size, 1);
    const int c = size / 2;
    const double inv = 2.0 / size;
    constexpr double pi = 3.14159265358979323846;
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const double v = (i - c) * inv;
            const double u = (j - c) * inv;
            const double r = std::sqrt(u * u + v * v);
            double val = 0.5 + 0.5 * std::sin(ring_count * pi * r);
            if (val < 0.0) val = 0.0;
            if (val > 1.0) val = 1.0;
            ds.targets(i * size + j, 0) = val;
        }
    }
    ds.sampling.sample_counts = {size, size};
    ds.value_min = 0.0;
    ds.value_max = 1.0;
    return ds;
}

} // namespace inrfit
