#pragma once

namespace ihr::kernels {

// Dense kernels used by the model and curvature passes. Each has a serial
// reference implementation and an OpenMP variant parallelized over output
// elements. The inner accumulation loop is identical in both, so results are
// bit-equal regardless of thread count; tests assert this.

// Work (n*m*k flops) below which the OpenMP variants stay serial.
inline constexpr long kParallelWork = 1L << 15;

// c (n x m) = a (n x k) * b^T, b stored row-major (m x k)
void gemm_nt(const double* a, const double* b, double* c, int n, int m, int k);
void gemm_nt_serial(const double* a, const double* b, double* c, int n, int m, int k);

// c (n x m) = a (n x k) * b, b stored row-major (k x m)
void gemm_nn(const double* a, const double* b, double* c, int n, int k, int m);
void gemm_nn_serial(const double* a, const double* b, double* c, int n, int k, int m);

// c (p x q) = a^T * b, a stored row-major (n x p), b stored row-major (n x q)
void gemm_tn(const double* a, const double* b, double* c, int n, int p, int q);
void gemm_tn_serial(const double* a, const double* b, double* c, int n, int p, int q);

// m_out (d x d) = x^T * x, x stored row-major (n x d); exactly symmetric.
void gram(const double* x, double* m_out, int n, int d);
void gram_serial(const double* x, double* m_out, int n, int d);

// y[i] = tanh(x[i]) for i in [0, n)
void tanh_map(const double* x, double* y, long n);
void tanh_map_serial(const double* x, double* y, long n);

int max_threads();

} // namespace ihr::kernels
