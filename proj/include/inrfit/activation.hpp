#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

namespace detail {

// Branch-free sin/cos on doubles, accurate to a few ulp for |x| up to ~1e8.
// Plain arithmetic only, so compilers vectorize the activation loops; libm
// calls would dominate training time otherwise. Reduction is x - n*pi with
// pi split in two, sign recovered from the parity of n.

inline double poly_sin(double r) {
    const double t = r * r;
    double p = 2.724114148828511e-15;
    p = p * t - 7.643265098416503e-13;
    p = p * t + 1.605894994850948e-10;
    p = p * t - 2.5052107069379085e-08;
    p = p * t + 2.7557319213172704e-06;
    p = p * t - 0.00019841269841220074;
    p = p * t + 0.008333333333333219;
    p = p * t - 0.16666666666666666;
    p = p * t + 1.0;
    return r * p;
}

inline double poly_cos(double r) {
    const double t = r * r;
    double p = 4.613787823109249e-14;
    p = p * t - 1.1463353851420368e-11;
    p = p * t + 2.0876579024725015e-09;
    p = p * t - 2.7557316729819655e-07;
    p = p * t + 2.4801587281096636e-05;
    p = p * t - 0.0013888888888794588;
    p = p * t + 0.0416666666666645;
    p = p * t - 0.49999999999999983;
    p = p * t + 1.0;
    return p;
}

constexpr double kInvPi = 0.3183098861837906715;
constexpr double kPiHi = 3.1415926535897931160;
constexpr double kPiLo = 1.2246467991473531772e-16;
constexpr double kRoundShift = 6755399441055744.0; // 1.5 * 2^52

inline double reduce_pi(double x, uint64_t& sign) {
    const double k = x * kInvPi + kRoundShift;
    const double n = k - kRoundShift;
    uint64_t bits;
    std::memcpy(&bits, &k, 8);
    sign = (bits & 1u) << 63;
    double r = std::fma(-n, kPiHi, x);
    return std::fma(-n, kPiLo, r);
}

inline double apply_sign(double v, uint64_t sign) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    bits ^= sign;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline double fast_sin(double x) {
    uint64_t sign;
    const double r = reduce_pi(x, sign);
    return apply_sign(poly_sin(r), sign);
}

inline double fast_cos(double x) {
    uint64_t sign;
    const double r = reduce_pi(x, sign);
    return apply_sign(poly_cos(r), sign);
}

} // namespace detail

enum class ActivationKind { Linear, Sine, Finer, FmSine, FmFiner, Gauss };

inline std::string to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::Linear: return "linear";
        case ActivationKind::Sine: return "sine";
        case ActivationKind::Finer: return "finer";
        case ActivationKind::FmSine: return "fm-sine";
        case ActivationKind::FmFiner: return "fm-finer";
        case ActivationKind::Gauss: return "gauss";
    }
    return "?";
}

// Per-layer activation. omega0 is the shared angular frequency of Sine/Finer;
// for the Fm kinds every output column j uses multipliers[j] instead and
// omega0 only shapes the init. gauss_scale is the s in exp(-(s z)^2).
struct ActivationSpec {
    ActivationKind kind = ActivationKind::Linear;
    double omega0 = 30.0;
    double gauss_scale = 16.0;
    std::vector<double> multipliers;
};

inline bool is_fm(ActivationKind k) { return k == ActivationKind::FmSine || k == ActivationKind::FmFiner; }

inline bool is_periodic(ActivationKind k) {
    return k == ActivationKind::Sine || k == ActivationKind::Finer || is_fm(k);
}

// Frequency ladder of per-neuron multipliers: entry k is
// (k + k_offset) * factor * f_nyquist / width, optionally rescaled by
// angular_scale. With k_offset 0 the first entry is exactly 0, which makes
// that neuron constant; callers that want to avoid the dead neuron pass
// k_offset 1.
inline std::vector<double> make_fm_multipliers(int width, double f_nyquist, double factor,
                                               int k_offset = 0, double angular_scale = 1.0) {
    if (width < 1) throw ConfigError("make_fm_multipliers: width must be >= 1, got " + std::to_string(width));
    if (!(f_nyquist > 0.0))
        throw ConfigError("make_fm_multipliers: f_nyquist must be positive, got " + std::to_string(f_nyquist));
    if (!(factor > 0.0) || factor > 1.0)
        throw ConfigError("make_fm_multipliers: factor must be in (0, 1], got " + std::to_string(factor));
    if (k_offset < 0) throw ConfigError("make_fm_multipliers: k_offset must be >= 0");
    if (!(angular_scale > 0.0)) throw ConfigError("make_fm_multipliers: angular_scale must be positive");
    std::vector<double> mult(static_cast<size_t>(width));
    for (int k = 0; k < width; ++k)
        mult[static_cast<size_t>(k)] = (k + k_offset) * factor * f_nyquist / width * angular_scale;
    return mult;
}

namespace detail {

inline void check_fm_width(const ActivationSpec& spec, const Matrix& z) {
    if (!is_fm(spec.kind)) return;
    if (static_cast<int>(spec.multipliers.size()) != z.cols)
        throw ShapeError("activation: " + std::to_string(spec.multipliers.size()) +
                         " multipliers for width " + std::to_string(z.cols));
}

} // namespace detail

// Elementwise activation of pre-activations z (rows = samples, cols = neurons).
inline Matrix activate(const ActivationSpec& spec, const Matrix& z) {
    detail::check_fm_width(spec, z);
    Matrix a(z.rows, z.cols);
    const int n = z.rows, w = z.cols;
    switch (spec.kind) {
        case ActivationKind::Linear:
            a.data = z.data;
            break;
        case ActivationKind::Sine: {
            const double om = spec.omega0;
            for (size_t i = 0; i < z.size(); ++i) a.data[i] = detail::fast_sin(om * z.data[i]);
            break;
        }
        case ActivationKind::Finer: {
            const double om = spec.omega0;
            for (size_t i = 0; i < z.size(); ++i) {
                const double v = z.data[i];
                a.data[i] = detail::fast_sin(om * (std::fabs(v) + 1.0) * v);
            }
            break;
        }
        case ActivationKind::FmSine: {
            const double* mult = spec.multipliers.data();
            for (int i = 0; i < n; ++i) {
                const double* zr = z.row(i);
                double* ar = a.row(i);
                for (int j = 0; j < w; ++j) ar[j] = detail::fast_sin(mult[j] * zr[j]);
            }
            break;
        }
        case ActivationKind::FmFiner: {
            const double* mult = spec.multipliers.data();
            for (int i = 0; i < n; ++i) {
                const double* zr = z.row(i);
                double* ar = a.row(i);
                for (int j = 0; j < w; ++j) {
                    const double v = zr[j];
                    ar[j] = detail::fast_sin(mult[j] * (std::fabs(v) + 1.0) * v);
                }
            }
            break;
        }
        case ActivationKind::Gauss: {
            const double s = spec.gauss_scale;
            for (size_t i = 0; i < z.size(); ++i) {
                const double sz = s * z.data[i];
                a.data[i] = std::exp(-sz * sz);
            }
            break;
        }
    }
    return a;
}

// Elementwise derivative of the activation with respect to z.
inline Matrix activate_grad(const ActivationSpec& spec, const Matrix& z) {
    detail::check_fm_width(spec, z);
    Matrix g(z.rows, z.cols);
    const int n = z.rows, w = z.cols;
    switch (spec.kind) {
        case ActivationKind::Linear:
            for (auto& v : g.data) v = 1.0;
            break;
        case ActivationKind::Sine: {
            const double om = spec.omega0;
            for (size_t i = 0; i < z.size(); ++i) g.data[i] = om * detail::fast_cos(om * z.data[i]);
            break;
        }
        case ActivationKind::Finer: {
            const double om = spec.omega0;
            for (size_t i = 0; i < z.size(); ++i) {
                const double v = z.data[i];
                const double av = std::fabs(v);
                g.data[i] = om * (2.0 * av + 1.0) * detail::fast_cos(om * (av + 1.0) * v);
            }
            break;
        }
        case ActivationKind::FmSine: {
            const double* mult = spec.multipliers.data();
            for (int i = 0; i < n; ++i) {
                const double* zr = z.row(i);
                double* gr = g.row(i);
                for (int j = 0; j < w; ++j) gr[j] = mult[j] * detail::fast_cos(mult[j] * zr[j]);
            }
            break;
        }
        case ActivationKind::FmFiner: {
            const double* mult = spec.multipliers.data();
            for (int i = 0; i < n; ++i) {
                const double* zr = z.row(i);
                double* gr = g.row(i);
                for (int j = 0; j < w; ++j) {
                    const double v = zr[j];
                    const double av = std::fabs(v);
                    gr[j] = mult[j] * (2.0 * av + 1.0) * detail::fast_cos(mult[j] * (av + 1.0) * v);
                }
            }
            break;
        }
        case ActivationKind::Gauss: {
            const double s = spec.gauss_scale;
            for (size_t i = 0; i < z.size(); ++i) {
                const double v = z.data[i];
                const double sz = s * v;
                g.data[i] = -2.0 * s * s * v * std::exp(-sz * sz);
            }
            break;
        }
    }
    return g;
}

} // namespace inrfit
