#include "ihr/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ihr::kernels {

namespace {

inline double dot(const double* x, const double* y, int k) {
    double s = 0.0;
    for (int t = 0; t < k; ++t) s += x[t] * y[t];
    return s;
}

// column-strided dot: sum_t a[t] * b[t * stride]
inline double dot_strided(const double* a, const double* b, int k, int stride) {
    double s = 0.0;
    for (int t = 0; t < k; ++t) s += a[t] * b[static_cast<long>(t) * stride];
    return s;
}

} // namespace

void gemm_nt_serial(const double* a, const double* b, double* c, int n, int m, int k) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            c[static_cast<long>(i) * m + j] = dot(a + static_cast<long>(i) * k, b + static_cast<long>(j) * k, k);
}

void gemm_nt(const double* a, const double* b, double* c, int n, int m, int k) {
    const long work = static_cast<long>(n) * m * k;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelWork)
#endif
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            c[static_cast<long>(i) * m + j] = dot(a + static_cast<long>(i) * k, b + static_cast<long>(j) * k, k);
    (void)work;
}

void gemm_nn_serial(const double* a, const double* b, double* c, int n, int k, int m) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            c[static_cast<long>(i) * m + j] = dot_strided(a + static_cast<long>(i) * k, b + j, k, m);
}

void gemm_nn(const double* a, const double* b, double* c, int n, int k, int m) {
    const long work = static_cast<long>(n) * m * k;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelWork)
#endif
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            c[static_cast<long>(i) * m + j] = dot_strided(a + static_cast<long>(i) * k, b + j, k, m);
    (void)work;
}

void gemm_tn_serial(const double* a, const double* b, double* c, int n, int p, int q) {
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) {
            double s = 0.0;
            for (int t = 0; t < n; ++t)
                s += a[static_cast<long>(t) * p + i] * b[static_cast<long>(t) * q + j];
            c[static_cast<long>(i) * q + j] = s;
        }
}

void gemm_tn(const double* a, const double* b, double* c, int n, int p, int q) {
    const long work = static_cast<long>(n) * p * q;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelWork)
#endif
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) {
            double s = 0.0;
            for (int t = 0; t < n; ++t)
                s += a[static_cast<long>(t) * p + i] * b[static_cast<long>(t) * q + j];
            c[static_cast<long>(i) * q + j] = s;
        }
    (void)work;
}

void gram_serial(const double* x, double* m_out, int n, int d) {
    gemm_tn_serial(x, x, m_out, n, d, d);
}

void gram(const double* x, double* m_out, int n, int d) {
    gemm_tn(x, x, m_out, n, d, d);
}

void tanh_map_serial(const double* x, double* y, long n) {
    for (long i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void tanh_map(const double* x, double* y, long n) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n >= kParallelWork)
#endif
    for (long i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace ihr::kernels
