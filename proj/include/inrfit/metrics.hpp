#pragma once

#include <cmath>
#include <limits>

#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

inline double mse(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeError("mse: " + shape_str(a) + " vs " + shape_str(b));
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

// 10 log10(max^2 / mse), +inf for an exact match.
inline double psnr(const Matrix& pred, const Matrix& target, double max_value) {
    if (!(max_value > 0.0)) throw ConfigError("psnr: max_value must be positive");
    const double m = mse(pred, target);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_value * max_value / m);
}

// Single-window SSIM over whole-signal statistics (population moments),
// c1 = (0.01 max)^2, c2 = (0.03 max)^2.
inline double ssim_global(const Matrix& a, const Matrix& b, double max_value) {
    if (!a.same_shape(b)) throw ShapeError("ssim_global: " + shape_str(a) + " vs " + shape_str(b));
    if (!(max_value > 0.0)) throw ConfigError("ssim_global: max_value must be positive");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a.data[i];
        mb += b.data[i];
    }
    ma /= n;
    mb /= n;
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double da = a.data[i] - ma;
        const double db = b.data[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    va /= n;
    vb /= n;
    cov /= n;
    const double c1 = 0.01 * max_value * 0.01 * max_value;
    const double c2 = 0.03 * max_value * 0.03 * max_value;
    return ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

// Intersection over union with both grids thresholded at 0.5.
inline double iou(const Matrix& pred, const Matrix& gt) {
    if (!pred.same_shape(gt)) throw ShapeError("iou: " + shape_str(pred) + " vs " + shape_str(gt));
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.data[i] > 0.5;
        const bool g = gt.data[i] > 0.5;
        inter += p && g;
        uni += p || g;
    }
    if (uni == 0) throw MathError("iou: undefined, union is empty");
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace inrfit
