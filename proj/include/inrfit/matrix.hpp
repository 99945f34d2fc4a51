#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "inrfit/errors.hpp"

namespace inrfit {

// Dense row-major matrix of doubles. All linear algebra in this library runs
// through the routines below so that summation order stays fixed: every
// output entry accumulates over the shared dimension in ascending order,
// which keeps results bit-identical across runs for a given build.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

    size_t size() const { return data.size(); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

namespace detail {

// C = A*B (or C += A*B with Accumulate) for row-major A m x k, B k x n.
// Register-tiled 4x32 kernel reading rows of B directly; the k loop is
// innermost and strictly ascending for every C entry, so the tiling changes
// speed but not the summation order.
template <bool Accumulate>
inline void gemm_nn_acc(const double* A, const double* B, double* C, int m, int k, int n) {
    constexpr int MR = 4;
    constexpr int NR = 32;
    int i = 0;
    for (; i + MR <= m; i += MR) {
        const double* a[MR];
        for (int r = 0; r < MR; ++r) a[r] = A + static_cast<size_t>(i + r) * k;
        int j = 0;
        for (; j + NR <= n; j += NR) {
            double acc[MR][NR];
            for (int r = 0; r < MR; ++r)
                for (int t = 0; t < NR; ++t)
                    acc[r][t] = Accumulate ? C[static_cast<size_t>(i + r) * n + j + t] : 0.0;
            const double* bp = B + j;
            for (int p = 0; p < k; ++p, bp += n) {
                for (int r = 0; r < MR; ++r) {
                    const double av = a[r][p];
                    for (int t = 0; t < NR; ++t) acc[r][t] += av * bp[t];
                }
            }
            for (int r = 0; r < MR; ++r)
                for (int t = 0; t < NR; ++t) C[static_cast<size_t>(i + r) * n + j + t] = acc[r][t];
        }
        for (; j < n; ++j) {
            for (int r = 0; r < MR; ++r) {
                double s = Accumulate ? C[static_cast<size_t>(i + r) * n + j] : 0.0;
                const double* ar = a[r];
                const double* bp = B + j;
                for (int p = 0; p < k; ++p, bp += n) s += ar[p] * *bp;
                C[static_cast<size_t>(i + r) * n + j] = s;
            }
        }
    }
    for (; i < m; ++i) {
        const double* ar = A + static_cast<size_t>(i) * k;
        int j = 0;
        for (; j + NR <= n; j += NR) {
            double acc[NR];
            for (int t = 0; t < NR; ++t)
                acc[t] = Accumulate ? C[static_cast<size_t>(i) * n + j + t] : 0.0;
            const double* bp = B + j;
            for (int p = 0; p < k; ++p, bp += n) {
                const double av = ar[p];
                for (int t = 0; t < NR; ++t) acc[t] += av * bp[t];
            }
            for (int t = 0; t < NR; ++t) C[static_cast<size_t>(i) * n + j + t] = acc[t];
        }
        for (; j < n; ++j) {
            double s = Accumulate ? C[static_cast<size_t>(i) * n + j] : 0.0;
            const double* bp = B + j;
            for (int p = 0; p < k; ++p, bp += n) s += ar[p] * *bp;
            C[static_cast<size_t>(i) * n + j] = s;
        }
    }
}

inline void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n) {
    gemm_nn_acc<false>(A, B, C, m, k, n);
}

// C = A^T * B with A k x m, B k x n (row-major). Here k is the long batch
// dimension, so walking columns of A directly would stride through the whole
// matrix once per tile. Instead A is transposed 256 rows at a time (32x32
// cache blocks, the chunk stays L2-resident) and each chunk product is
// accumulated into C with the kernel above. Chunks advance in ascending k and
// the kernel walks each chunk in ascending k, so every C entry still sums
// over the batch in the same order as the naive loop.
inline void gemm_tn(const double* A, const double* B, double* C, int k, int m, int n) {
    // A few output columns (first-layer weight gradients, where n is the tiny
    // input dimension) would reduce to long dependent scalar chains. a*b and
    // b*a are the same bits in IEEE arithmetic, so B^T*A transposed is the
    // identical result through the wide vectorized path.
    if (n < 4 && m >= 32) {
        std::vector<double> d(static_cast<size_t>(n) * m);
        gemm_tn(B, A, d.data(), k, n, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                C[static_cast<size_t>(i) * n + j] = d[static_cast<size_t>(j) * m + i];
        return;
    }
    constexpr int KB = 256;
    constexpr int BS = 32;
    for (size_t i = 0, len = static_cast<size_t>(m) * n; i < len; ++i) C[i] = 0.0;
    std::vector<double> at(static_cast<size_t>(m) * (k < KB ? k : KB));
    for (int pb = 0; pb < k; pb += KB) {
        const int pe = pb + KB < k ? pb + KB : k;
        const int kc = pe - pb;
        for (int p0 = 0; p0 < kc; p0 += BS)
            for (int i0 = 0; i0 < m; i0 += BS) {
                const int p1 = p0 + BS < kc ? p0 + BS : kc;
                const int i1 = i0 + BS < m ? i0 + BS : m;
                for (int p = p0; p < p1; ++p)
                    for (int i = i0; i < i1; ++i)
                        at[static_cast<size_t>(i) * kc + p] = A[static_cast<size_t>(pb + p) * m + i];
            }
        gemm_nn_acc<true>(at.data(), B + static_cast<size_t>(pb) * n, C, m, kc, n);
    }
}

} // namespace detail

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: inner dimensions differ, (" + shape_str(a) + ")*(" + shape_str(b) + ")");
    Matrix c(a.rows, b.cols);
    detail::gemm_nn(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

// a^T * b without materializing the transpose.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw ShapeError("matmul_tn: outer dimensions differ, (" + shape_str(a) + ")^T*(" + shape_str(b) + ")");
    Matrix c(a.cols, b.cols);
    detail::gemm_tn(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    constexpr int BS = 32;
    for (int ib = 0; ib < a.rows; ib += BS)
        for (int jb = 0; jb < a.cols; jb += BS) {
            const int ie = ib + BS < a.rows ? ib + BS : a.rows;
            const int je = jb + BS < a.cols ? jb + BS : a.cols;
            for (int i = ib; i < ie; ++i)
                for (int j = jb; j < je; ++j) t(j, i) = a(i, j);
        }
    return t;
}

} // namespace inrfit
