#include "core/eigen_sym.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace logosp {

namespace {

// Householder reduction to symmetric tridiagonal form with accumulation of
// the orthogonal transformation in V (EISPACK tred2 lineage).
void tridiagonalize(Matrix& V, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(V.rows);
    for (int j = 0; j < n; ++j) d[j] = V.at(n - 1, j);

    for (int i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (int k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (int j = 0; j < i; ++j) {
                d[j] = V.at(i - 1, j);
                V.at(i, j) = 0.0;
                V.at(j, i) = 0.0;
            }
        } else {
            for (int k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0.0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (int j = 0; j < i; ++j) e[j] = 0.0;

            for (int j = 0; j < i; ++j) {
                f = d[j];
                V.at(j, i) = f;
                g = e[j] + V.at(j, j) * f;
                for (int k = j + 1; k <= i - 1; ++k) {
                    g += V.at(k, j) * d[k];
                    e[k] += V.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (int j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (int j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (int k = j; k <= i - 1; ++k) V.at(k, j) -= (f * e[k] + g * d[k]);
                d[j] = V.at(i - 1, j);
                V.at(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for (int i = 0; i < n - 1; ++i) {
        V.at(n - 1, i) = V.at(i, i);
        V.at(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (int k = 0; k <= i; ++k) d[k] = V.at(k, i + 1) / h;
            for (int j = 0; j <= i; ++j) {
                double g = 0.0;
                for (int k = 0; k <= i; ++k) g += V.at(k, i + 1) * V.at(k, j);
                for (int k = 0; k <= i; ++k) V.at(k, j) -= g * d[k];
            }
        }
        for (int k = 0; k <= i; ++k) V.at(k, i + 1) = 0.0;
    }
    for (int j = 0; j < n; ++j) {
        d[j] = V.at(n - 1, j);
        V.at(n - 1, j) = 0.0;
    }
    V.at(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of V
// along (EISPACK tql2 lineage).
void ql_implicit_shift(Matrix& V, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(V.rows);
    constexpr int kMaxIter = 80;

    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (int l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        int m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > kMaxIter)
                    fail_numeric("eigendecompose: QL failed to converge for eigenvalue " + std::to_string(l) +
                                 " after " + std::to_string(kMaxIter) + " iterations");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0.0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (int i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0;
                double c2 = c;
                double c3 = c;
                const double el1 = e[l + 1];
                double s = 0.0;
                double s2 = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for (int k = 0; k < n; ++k) {
                        h = V.at(k, i + 1);
                        V.at(k, i + 1) = s * V.at(k, i) + c * h;
                        V.at(k, i) = c * V.at(k, i) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
            d[l] += f;
            e[l] = 0.0;
        } else {
            d[l] += f;
            e[l] = 0.0;
        }
    }
}

}  // namespace

double max_asymmetry(const Matrix& A) {
    double worst = 0.0;
    for (size_t i = 0; i < A.rows; ++i)
        for (size_t j = i + 1; j < A.cols; ++j)
            worst = std::max(worst, std::abs(A.at(i, j) - A.at(j, i)));
    return worst;
}

SymEigen eigendecompose_symmetric(const Matrix& A) {
    if (A.rows != A.cols) fail_pre("eigendecompose: matrix must be square");
    const size_t n = A.rows;
    SymEigen out;
    out.vectors = A;
    out.values.assign(n, 0.0);
    if (n == 1) {
        out.values[0] = A.at(0, 0);
        out.vectors.at(0, 0) = 1.0;
        return out;
    }

    std::vector<double> d(n, 0.0), e(n, 0.0);
    tridiagonalize(out.vectors, d, e);
    ql_implicit_shift(out.vectors, d, e);

    // Ascending eigenvalues; stable on ties so the column order is fixed.
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](size_t a, size_t b) { return d[a] < d[b]; });

    Matrix sorted(n, n);
    for (size_t j = 0; j < n; ++j) {
        out.values[j] = d[perm[j]];
        for (size_t i = 0; i < n; ++i) sorted.at(i, j) = out.vectors.at(i, perm[j]);
    }

    // Sign canonicalization: largest-magnitude entry positive, ties resolved
    // by the lowest row index.
    for (size_t j = 0; j < n; ++j) {
        size_t arg = 0;
        double best = -1.0;
        for (size_t i = 0; i < n; ++i) {
            const double m = std::abs(sorted.at(i, j));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (sorted.at(arg, j) < 0.0)
            for (size_t i = 0; i < n; ++i) sorted.at(i, j) = -sorted.at(i, j);
    }
    out.vectors = std::move(sorted);
    return out;
}

SymEigen eigendecompose_symmetric_checked(const Matrix& A, double symmetry_tol) {
    const double asym = max_asymmetry(A);
    if (asym > symmetry_tol)
        fail_pre("eigendecompose: matrix asymmetry " + std::to_string(asym) + " exceeds tolerance " +
                 std::to_string(symmetry_tol));
    return eigendecompose_symmetric(A);
}

}  // namespace logosp
