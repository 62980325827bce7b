#pragma once

#include <span>
#include <vector>

#include "ihr/errors.hpp"

namespace ihr {

// Dense row-major matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

// Symmetric dense matrix; construction checks symmetry to 1e-10 absolute.
struct SymMatrix {
    int dim = 0;
    std::vector<double> data; // row-major dim x dim

    SymMatrix() = default;
    explicit SymMatrix(int n) : dim(n), data(static_cast<std::size_t>(n) * n, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * dim + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * dim + c]; }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    // Validates dim >= 1 and |m[i][j] - m[j][i]| <= 1e-10.
    static SymMatrix from_matrix(const Matrix& m);

    Matrix as_matrix() const;
    double trace() const;
};

// Returns a copy with lambda added to the diagonal.
SymMatrix damped(const SymMatrix& m, double lambda);

// Lower-triangular Cholesky factor; throws NotPositiveDefinite on a
// non-positive pivot (insufficient damping).
Matrix cholesky(const SymMatrix& m);

// Solves m * X = rhs for SPD m via Cholesky; rhs is dim x k.
Matrix sym_solve(const SymMatrix& m, const Matrix& rhs);

// Kronecker product a (x) b, test oracle for the factored curvature.
// Throws DimensionOverflow when a.dim * b.dim exceeds the limit.
SymMatrix kron(const SymMatrix& a, const SymMatrix& b, int limit = 4096);

double frobenius_norm(const Matrix& m);
double frobenius_norm(std::span<const double> v);

} // namespace ihr
