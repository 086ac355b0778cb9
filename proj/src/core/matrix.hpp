#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace logosp {

// Minimal dense row-major matrix of doubles. Sized for the desk-scale dense
// spectral path (S up to a few thousand); no views, no expression templates.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return a[r * cols + c]; }
    double at(size_t r, size_t c) const { return a[r * cols + c]; }
    const double* row_ptr(size_t r) const { return a.data() + r * cols; }
    double* row_ptr(size_t r) { return a.data() + r * cols; }
};

// C = A^T * B, with A m x n and B m x p. Accumulation order is fixed
// (ascending row index of A/B) so results are bit-reproducible.
inline Matrix matmul_at_b(const Matrix& A, const Matrix& B) {
    Matrix C(A.cols, B.cols);
    for (size_t k = 0; k < A.rows; ++k) {
        const double* arow = A.row_ptr(k);
        const double* brow = B.row_ptr(k);
        for (size_t i = 0; i < A.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = C.row_ptr(i);
            for (size_t j = 0; j < B.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return C;
}

// C = A * B, A m x n, B n x p. ikj loop order, deterministic.
inline Matrix matmul(const Matrix& A, const Matrix& B) {
    Matrix C(A.rows, B.cols);
    for (size_t i = 0; i < A.rows; ++i) {
        const double* arow = A.row_ptr(i);
        double* crow = C.row_ptr(i);
        for (size_t k = 0; k < A.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = B.row_ptr(k);
            for (size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

inline double max_abs_diff_from_identity(const Matrix& M) {
    double worst = 0.0;
    for (size_t i = 0; i < M.rows; ++i)
        for (size_t j = 0; j < M.cols; ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            const double d = std::abs(M.at(i, j) - want);
            if (d > worst) worst = d;
        }
    return worst;
}

}  // namespace logosp
