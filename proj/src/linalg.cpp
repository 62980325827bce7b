#include "ihr/linalg.hpp"

#include <cmath>
#include <string>

namespace ihr {

SymMatrix SymMatrix::from_matrix(const Matrix& m) {
    if (m.rows != m.cols || m.rows < 1)
        throw ShapeMismatch("SymMatrix requires a square matrix of dim >= 1, got " +
                            std::to_string(m.rows) + "x" + std::to_string(m.cols));
    for (int i = 0; i < m.rows; ++i)
        for (int j = i + 1; j < m.cols; ++j)
            if (std::fabs(m(i, j) - m(j, i)) > 1e-10)
                throw ShapeMismatch("matrix is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    SymMatrix s(m.rows);
    s.data = m.data;
    return s;
}

Matrix SymMatrix::as_matrix() const {
    Matrix m(dim, dim);
    m.data = data;
    return m;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim; ++i) t += (*this)(i, i);
    return t;
}

SymMatrix damped(const SymMatrix& m, double lambda) {
    SymMatrix out = m;
    for (int i = 0; i < m.dim; ++i) out(i, i) += lambda;
    return out;
}

Matrix cholesky(const SymMatrix& m) {
    const int n = m.dim;
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
        if (!(d > 0.0))
            throw NotPositiveDefinite("non-positive pivot " + std::to_string(d) + " at column " +
                                      std::to_string(j) + "; increase damping");
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int t = 0; t < j; ++t) s -= l(i, t) * l(j, t);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Matrix sym_solve(const SymMatrix& m, const Matrix& rhs) {
    if (rhs.rows != m.dim)
        throw ShapeMismatch("sym_solve: rhs has " + std::to_string(rhs.rows) + " rows, expected " +
                            std::to_string(m.dim));
    const int n = m.dim;
    const int k = rhs.cols;
    Matrix l = cholesky(m);
    Matrix x(n, k);
    // L y = rhs, then L^T x = y, per column
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = rhs(i, c);
            for (int t = 0; t < i; ++t) s -= l(i, t) * x(t, c);
            x(i, c) = s / l(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x(i, c);
            for (int t = i + 1; t < n; ++t) s -= l(t, i) * x(t, c);
            x(i, c) = s / l(i, i);
        }
    }
    return x;
}

SymMatrix kron(const SymMatrix& a, const SymMatrix& b, int limit) {
    const long dim = static_cast<long>(a.dim) * b.dim;
    if (dim > limit)
        throw DimensionOverflow("kron oracle dim " + std::to_string(dim) + " exceeds limit " +
                                std::to_string(limit));
    SymMatrix k(static_cast<int>(dim));
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) {
            const double aij = a(i, j);
            for (int r = 0; r < b.dim; ++r)
                for (int c = 0; c < b.dim; ++c)
                    k(i * b.dim + r, j * b.dim + c) = aij * b(r, c);
        }
    return k;
}

double frobenius_norm(const Matrix& m) {
    return frobenius_norm(std::span<const double>(m.data));
}

double frobenius_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace ihr
