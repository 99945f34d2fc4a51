#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "inrfit/errors.hpp"

namespace inrfit {

// Central-difference gradient of a scalar function, (f(x+h) - f(x-h)) / 2h
// per coordinate. Used as the independent check for analytic gradients.
template <typename F>
std::vector<double> finite_diff_grad(F&& f, std::vector<double> theta, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step must be positive, got " + std::to_string(h));
    std::vector<double> grad(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        theta[i] = orig + h;
        const double fp = f(theta);
        theta[i] = orig - h;
        const double fm = f(theta);
        theta[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw MathError("finite_diff_grad: non-finite objective at parameter " + std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

} // namespace inrfit
