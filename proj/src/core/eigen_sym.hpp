#pragma once

#include <vector>

#include "core/matrix.hpp"

namespace logosp {

struct SymEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j is the eigenvector of values[j]
};

// Dense symmetric eigendecomposition: Householder tridiagonalization followed
// by implicit-shift QL with eigenvector accumulation. Eigenvalues come back
// ascending; each eigenvector's largest-magnitude entry (ties: lowest index)
// is made positive so the basis is reproducible run to run.
// Throws on non-convergence.
SymEigen eigendecompose_symmetric(const Matrix& A);

// Contract-checking wrapper: rejects matrices that are not symmetric to
// symmetry_tol (max |a_ij - a_ji|).
SymEigen eigendecompose_symmetric_checked(const Matrix& A, double symmetry_tol = 1e-9);

double max_asymmetry(const Matrix& A);

}  // namespace logosp
