#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

struct SamplingInfo {
    std::vector<int> sample_counts;        // per dimension
    std::optional<double> sample_rate;     // Hz, 1D audio only
};

// Highest representable frequency: half the sample rate when one is known,
// otherwise half the smallest per-axis sample count (cycles per signal).
inline double nyquist_frequency(const SamplingInfo& info) {
    if (info.sample_rate) return *info.sample_rate / 2.0;
    if (info.sample_counts.empty()) throw DataError("nyquist_frequency: no sample counts");
    int m = info.sample_counts.front();
    for (int c : info.sample_counts) m = std::min(m, c);
    return m / 2.0;
}

namespace detail {

constexpr double kPi = 3.14159265358979323846;

// Orthonormal DST-II scale for row k of an N-point transform.
inline double dst_scale(int k, int n) {
    return k == n - 1 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
}

} // namespace detail

// Type-II discrete sine transform with orthonormal scaling:
// c_k = s_k * sum_n x_n sin(pi (k+1)(n+1/2) / N). The inverse is the
// transpose, so round trips are exact up to rounding. Naive O(N^2).
inline std::vector<double> dst_forward(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    if (n < 1) throw DataError("dst_forward: empty signal");
    std::vector<double> c(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double w = detail::kPi * (k + 1) / n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += x[static_cast<size_t>(i)] * std::sin(w * (i + 0.5));
        c[static_cast<size_t>(k)] = detail::dst_scale(k, n) * s;
    }
    return c;
}

inline std::vector<double> dst_inverse(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size());
    if (n < 1) throw DataError("dst_inverse: empty coefficients");
    std::vector<double> x(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            s += detail::dst_scale(k, n) * c[static_cast<size_t>(k)] * std::sin(detail::kPi * (k + 1) * (i + 0.5) / n);
        x[static_cast<size_t>(i)] = s;
    }
    return x;
}

// N x N orthonormal DST-II matrix; row k sampled over the N points.
inline Matrix dst_matrix(int n) {
    if (n < 1) throw DataError("dst_matrix: size must be >= 1");
    Matrix s(n, n);
    for (int k = 0; k < n; ++k) {
        const double scale = detail::dst_scale(k, n);
        for (int i = 0; i < n; ++i) s(k, i) = scale * std::sin(detail::kPi * (k + 1) * (i + 0.5) / n);
    }
    return s;
}

inline Matrix dst2_forward(const Matrix& image) {
    const Matrix sh = dst_matrix(image.rows);
    const Matrix sw = dst_matrix(image.cols);
    return matmul(matmul(sh, image), transpose(sw));
}

inline Matrix dst2_inverse(const Matrix& coeffs) {
    const Matrix sh = dst_matrix(coeffs.rows);
    const Matrix sw = dst_matrix(coeffs.cols);
    return matmul(matmul_tn(sh, coeffs), sw);
}

// Keep the m largest-magnitude 2D DST coefficients (ties broken by lowest
// row-major index), zero the rest, and transform back. The optimal m-term
// approximation in an orthonormal basis.
inline Matrix dst2_truncated_reconstruct(const Matrix& image, int m) {
    const size_t total = image.size();
    if (m < 1 || static_cast<size_t>(m) > total)
        throw ConfigError("dst2_truncated_reconstruct: M=" + std::to_string(m) + " outside [1, " +
                          std::to_string(total) + "]");
    Matrix coeffs = dst2_forward(image);
    std::vector<size_t> idx(total);
    std::iota(idx.begin(), idx.end(), size_t{0});
    const auto& c = coeffs.data;
    auto cmp = [&c](size_t a, size_t b) {
        const double ma = std::fabs(c[a]), mb = std::fabs(c[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    std::nth_element(idx.begin(), idx.begin() + m, idx.end(), cmp);
    std::vector<char> keep(total, 0);
    for (int i = 0; i < m; ++i) keep[idx[static_cast<size_t>(i)]] = 1;
    for (size_t i = 0; i < total; ++i)
        if (!keep[i]) coeffs.data[i] = 0.0;
    return dst2_inverse(coeffs);
}

// Sampled basis for explicit least-squares reconstruction; column m holds
// phi_m at the N grid points, frequencies in cycles per signal.
struct BasisSet {
    Matrix basis; // N x M
    std::vector<double> frequencies;
};

inline BasisSet make_dst_basis(int n, int m) {
    if (n < 1 || m < 1 || m > n)
        throw ConfigError("make_dst_basis: need 1 <= M <= N, got N=" + std::to_string(n) + " M=" +
                          std::to_string(m));
    BasisSet bs;
    bs.basis = Matrix(n, m);
    bs.frequencies.resize(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double scale = detail::dst_scale(j, n);
        for (int i = 0; i < n; ++i) bs.basis(i, j) = scale * std::sin(detail::kPi * (j + 1) * (i + 0.5) / n);
        bs.frequencies[static_cast<size_t>(j)] = (j + 1) / 2.0;
    }
    return bs;
}

// c_m = <f, phi_m> / <phi_m, phi_m>, each coefficient independent. Valid as
// a least-squares solution because the basis columns are orthogonal.
inline std::vector<double> project_coefficients(const std::vector<double>& signal, const BasisSet& basis) {
    const int n = basis.basis.rows, m = basis.basis.cols;
    if (static_cast<int>(signal.size()) != n)
        throw ShapeError("project_coefficients: signal length " + std::to_string(signal.size()) +
                         " != basis rows " + std::to_string(n));
    std::vector<double> c(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p = basis.basis(i, j);
            num += signal[static_cast<size_t>(i)] * p;
            den += p * p;
        }
        if (den == 0.0) throw MathError("project_coefficients: zero-norm basis column " + std::to_string(j));
        c[static_cast<size_t>(j)] = num / den;
    }
    return c;
}

// f*(x) = sum c_m phi_m(x) evaluated at the basis sample points.
inline std::vector<double> synthesize(const BasisSet& basis, const std::vector<double>& coeffs) {
    const int n = basis.basis.rows, m = basis.basis.cols;
    if (static_cast<int>(coeffs.size()) != m)
        throw ShapeError("synthesize: " + std::to_string(coeffs.size()) + " coefficients for " +
                         std::to_string(m) + " basis columns");
    std::vector<double> out(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += coeffs[static_cast<size_t>(j)] * basis.basis(i, j);
        out[static_cast<size_t>(i)] = s;
    }
    return out;
}

} // namespace inrfit
